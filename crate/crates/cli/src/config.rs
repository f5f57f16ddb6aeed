//! Run configuration: one JSON document per run. Complex numbers are written
//! as `[re, im]` pairs and polynomial terms as exponent vectors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use plurikit_core::forms::CMatrix;
use plurikit_core::{
    AffineForm, CVector, CapSpec, ConstForm, Current, Error, Frame, HoloFunction, PolynomialMap, ProductSpace,
    PshFunction, RadialGrid, RegionSpec, Result, C64,
};

pub type Complex = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub space: SpaceSpec,
    pub current: CurrentSpec,
    pub grid: GridSpec,
    pub mc: McSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grassmannian: Option<GrassmannianSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<CapConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<RegionsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_set: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_sequence: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<ChiSpec>,
    /// Crofton runs on non-pluriharmonic instances: report residuals only.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exploratory: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub n: usize,
    /// Size of the `t` block for product-space runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurrentSpec {
    ZeroSet { function: FunctionSpec },
    Potential { potential: PotentialSpec },
    ConstForm { form: FormSpec },
    Sum { members: Vec<SumMember> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumMember {
    pub weight: f64,
    pub current: CurrentSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Polynomial { terms: Vec<TermSpec> },
    /// `<linear, z> - exp(<exponent, z>)`
    ExpGraph { linear: Vec<Complex>, exponent: Vec<Complex> },
    /// `<linear, z> - sin(<argument, z>)`
    SinGraph { linear: Vec<Complex>, argument: Vec<Complex> },
    AffineProduct { factors: Vec<AffineSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub exponents: Vec<u32>,
    pub coeff: Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineSpec {
    pub coeffs: Vec<Complex>,
    pub constant: Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    LogNormSq,
    NormSq,
    /// `log(|<coeffs, z>|^2 + floor)`
    SmoothedLogMax { coeffs: Vec<Complex>, floor: f64 },
    LogModulus { function: FunctionSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FormSpec {
    /// `beta^power`, a power of the Kahler form.
    Kahler {
        #[serde(default = "one")]
        power: usize,
    },
    /// Kahler form of the listed coordinates only.
    PartialKahler { coords: Vec<usize> },
    /// Hermitian coefficient matrix on the basis of `k`-subsets, row by row.
    Matrix { k: usize, rows: Vec<Vec<Complex>> },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    pub budget: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrassmannianSpec {
    pub q: usize,
    pub frames: usize,
    /// Explicit frames, each a list of `q` column vectors; they are
    /// orthonormalized and used instead of random sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<Vec<Vec<Vec<Complex>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapConfig {
    /// Column vectors of the centre plane; `None` takes the whole Grassmannian.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<Vec<Complex>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionsSpec {
    /// Fixed region in the `t` block for the `N` profile.
    pub d: RegionConfig,
    /// Fixed region in the `z` block for the `M` profile.
    pub d_prime: RegionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionConfig {
    Ball { center: Vec<Complex>, radius: f64 },
    Box { center: Vec<Complex>, half_widths: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiSpec {
    /// Input proximate order `rho + decay / (1 + r)`.
    pub rho: f64,
    #[serde(default)]
    pub decay: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_max: Option<f64>,
}

fn cx(z: &Complex) -> C64 {
    C64::new(z[0], z[1])
}

fn cxs(v: &[Complex]) -> Vec<C64> {
    v.iter().map(cx).collect()
}

fn finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be finite")))
    }
}

fn frame_from(cols: &[Vec<Complex>]) -> Result<Frame> {
    let cols = cols.iter().map(|c| CVector::new(cxs(c))).collect::<Result<Vec<_>>>()?;
    Frame::orthonormalize(cols)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }

    /// Structural checks that need no computation. Building the current and
    /// grid catches the remaining ones.
    pub fn validate(&self) -> Result<()> {
        if self.space.n == 0 || self.space.m == Some(0) {
            return Err(Error::config("space dimensions must be positive"));
        }
        finite("grid.r_min", self.grid.r_min)?;
        finite("grid.r_max", self.grid.r_max)?;
        if self.mc.budget == 0 {
            return Err(Error::config("mc.budget must be positive"));
        }
        for (name, v) in [("alpha_set", &self.alpha_set), ("r_sequence", &self.r_sequence)] {
            for x in v.iter().flatten() {
                finite(name, *x)?;
            }
        }
        if let Some(c) = &self.chi {
            finite("chi.rho", c.rho)?;
            finite("chi.decay", c.decay)?;
            if let Some(p) = c.probe_max {
                finite("chi.probe_max", p)?;
            }
        }
        if let Some(c) = &self.cap {
            if let Some(t) = c.theta {
                finite("cap.theta", t)?;
            }
        }
        self.current()?;
        self.radial_grid()?;
        Ok(())
    }

    /// Ambient dimension of the current: `n + m` for product-space runs.
    pub fn total_dim(&self) -> usize {
        self.space.n + self.space.m.unwrap_or(0)
    }

    pub fn current(&self) -> Result<Current> {
        build_current(&self.current, self.total_dim())
    }

    pub fn radial_grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.grid.r_min, self.grid.r_max, self.grid.points)
    }

    pub fn product_space(&self) -> Result<ProductSpace> {
        match self.space.m {
            Some(m) => ProductSpace::new(self.space.n, m),
            None => Err(Error::config("directional runs need space.m")),
        }
    }

    pub fn grassmannian(&self) -> Result<&GrassmannianSpec> {
        self.grassmannian
            .as_ref()
            .ok_or_else(|| Error::config("this command needs a grassmannian block"))
    }

    /// Explicit frames from the config, if any.
    pub fn fixed_frames(&self) -> Result<Option<Vec<Frame>>> {
        match self.grassmannian.as_ref().and_then(|g| g.fixed.as_ref()) {
            Some(fs) => Ok(Some(fs.iter().map(|f| frame_from(f)).collect::<Result<_>>()?)),
            None => Ok(None),
        }
    }

    pub fn cap(&self) -> Result<CapSpec> {
        let q = self.grassmannian()?.q;
        match &self.cap {
            None | Some(CapConfig { center: None, .. }) => CapSpec::whole(self.total_dim(), q),
            Some(CapConfig {
                center: Some(c),
                theta,
            }) => {
                let theta = theta.ok_or_else(|| Error::config("cap.theta is required with cap.center"))?;
                CapSpec::new(frame_from(c)?, theta)
            }
        }
    }

    pub fn regions(&self) -> Result<(RegionSpec, RegionSpec)> {
        let r = self
            .regions
            .as_ref()
            .ok_or_else(|| Error::config("directional runs need a regions block"))?;
        Ok((build_region(&r.d)?, build_region(&r.d_prime)?))
    }
}

fn build_region(r: &RegionConfig) -> Result<RegionSpec> {
    match r {
        RegionConfig::Ball { center, radius } => RegionSpec::ball(CVector::new(cxs(center))?, *radius),
        RegionConfig::Box { center, half_widths } => RegionSpec::cuboid(CVector::new(cxs(center))?, half_widths.clone()),
    }
}

fn check_len(what: &str, len: usize, n: usize) -> Result<()> {
    if len == n {
        Ok(())
    } else {
        Err(Error::config(format!("{what} has length {len}, expected {n}")))
    }
}

fn build_function(f: &FunctionSpec, n: usize) -> Result<HoloFunction> {
    match f {
        FunctionSpec::Polynomial { terms } => {
            let terms = terms.iter().map(|t| (t.exponents.clone(), cx(&t.coeff))).collect();
            HoloFunction::polynomial(PolynomialMap::new(n, terms)?)
        }
        FunctionSpec::ExpGraph { linear, exponent } => {
            check_len("linear", linear.len(), n)?;
            HoloFunction::exp_graph(cxs(linear), cxs(exponent))
        }
        FunctionSpec::SinGraph { linear, argument } => {
            check_len("linear", linear.len(), n)?;
            HoloFunction::sin_graph(cxs(linear), cxs(argument))
        }
        FunctionSpec::AffineProduct { factors } => {
            let forms = factors
                .iter()
                .map(|a| {
                    check_len("affine coeffs", a.coeffs.len(), n)?;
                    Ok(AffineForm {
                        coeffs: cxs(&a.coeffs),
                        constant: cx(&a.constant),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            HoloFunction::affine_product(forms)
        }
    }
}

fn build_current(spec: &CurrentSpec, n: usize) -> Result<Current> {
    Ok(match spec {
        CurrentSpec::ZeroSet { function } => Current::zero_set(build_function(function, n)?),
        CurrentSpec::Potential { potential } => Current::potential(match potential {
            PotentialSpec::LogNormSq => PshFunction::log_norm_sq(n)?,
            PotentialSpec::NormSq => PshFunction::norm_sq(n)?,
            PotentialSpec::SmoothedLogMax { coeffs, floor } => {
                check_len("coeffs", coeffs.len(), n)?;
                PshFunction::smoothed_log_max(cxs(coeffs), *floor)?
            }
            PotentialSpec::LogModulus { function } => PshFunction::log_modulus(build_function(function, n)?)?,
        }),
        CurrentSpec::ConstForm { form } => Current::ConstForm(match form {
            FormSpec::Kahler { power } => ConstForm::kahler_power(n, *power)?,
            FormSpec::PartialKahler { coords } => ConstForm::partial_kahler(n, coords)?,
            FormSpec::Matrix { k, rows } => {
                let size = rows.len();
                if rows.iter().any(|r| r.len() != size) {
                    return Err(Error::config("form matrix must be square"));
                }
                let h = CMatrix::from_fn(size, size, |i, j| cx(&rows[i][j]));
                ConstForm::new(n, *k, h)?
            }
        }),
        CurrentSpec::Sum { members } => Current::nonneg_sum(
            members
                .iter()
                .map(|m| Ok((m.weight, build_current(&m.current, n)?)))
                .collect::<Result<_>>()?,
        )?,
    })
}
