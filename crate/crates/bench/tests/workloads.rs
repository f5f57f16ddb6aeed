use plurikit_bench::{currents, generic_line, grid, SEED};
use plurikit_core::{nu_profile, slice_profile};

#[test]
fn workloads_run_at_small_budget() {
    let g = grid().unwrap();
    let line = generic_line().unwrap();
    for (name, t) in currents().unwrap() {
        let p = nu_profile(&t, &g, 2000, SEED).unwrap();
        assert!(p.values.iter().all(|v| v.is_finite()), "{name}");
        let s = slice_profile(&t, &line, &g, 2000, SEED).unwrap();
        assert_eq!(s.len(), g.len(), "{name}");
    }
}
