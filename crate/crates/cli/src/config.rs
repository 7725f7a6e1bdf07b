//! The declarative run configuration.

use anyhow::{bail, Context, Result};
use bridgewave::aliasing::{AmplitudeMethod, AnalyticityParams, FftMode};
use bridgewave::approximation::NewtonOptions;
use bridgewave::symbols::SymbolParams;
use bridgewave::{IndexBox, Interval};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

/// A half-length, given either as a number or as `"pi/x"`, `"pi*x"` or `"pi"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Length {
    Value(f64),
    Expr(String),
}

impl Length {
    pub fn resolve(&self) -> Result<f64> {
        let x = match self {
            Length::Value(x) => *x,
            Length::Expr(s) => parse_length(s)?,
        };
        if !(x > 0.0 && x.is_finite()) {
            bail!("lengths must be positive and finite, got {x}");
        }
        Ok(x)
    }
}

fn parse_length(s: &str) -> Result<f64> {
    let s = s.trim();
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .with_context(|| format!("bad length {s:?}"))
    };
    if s == "pi" {
        Ok(PI)
    } else if let Some(rest) = s.strip_prefix("pi/") {
        Ok(PI / num(rest)?)
    } else if let Some(rest) = s.strip_prefix("pi*") {
        Ok(PI * num(rest)?)
    } else {
        num(s)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    /// Wave speed as a decimal string, enclosed by outward rounding.
    pub c: String,
    pub d1: Length,
    pub d2: Length,
    /// Box of the approximate solution.
    pub n0: [usize; 2],
    /// Box of the finite operator block.
    pub n: [usize; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AliasingSection {
    pub nu: [f64; 2],
    pub nfft: [usize; 2],
    /// The head of `e^Ū` extends at least to this `n1` on the `n2 = 0` row.
    #[serde(default)]
    pub head_n1: usize,
    #[serde(default = "default_amplitude")]
    pub amplitude: AmplitudeMethod,
    #[serde(default = "default_fft_mode")]
    pub fft_mode: FftMode,
}

fn default_amplitude() -> AmplitudeMethod {
    AmplitudeMethod::Contour
}

fn default_fft_mode() -> FftMode {
    FftMode::Strict
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymbolsSection {
    /// Rows `n2 <` this are integrated numerically in `κ₂`.
    pub kappa2_split: usize,
    pub kappa2_xi_cut: f64,
}

impl Default for SymbolsSection {
    fn default() -> Self {
        SymbolsSection {
            kappa2_split: 40,
            kappa2_xi_cut: 4.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonSection {
    pub tol: f64,
    pub max_iter: usize,
    /// `approx` fails when the final residual exceeds this.
    pub max_residual: Option<f64>,
}

impl Default for NewtonSection {
    fn default() -> Self {
        let d = NewtonOptions::default();
        NewtonSection {
            tol: d.tol,
            max_iter: d.max_iter,
            max_residual: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilitySection {
    /// `δ₀` as a fraction of the essential spectrum floor.
    pub delta0_fraction: Option<f64>,
    /// Explicit shift `t`; defaults to `1 + |λ_min|`.
    pub t: Option<f64>,
    /// Re-run the enclosure once in a window tightened around the
    /// eigenvalues found by the first pass.
    pub refine: bool,
}

impl Default for StabilitySection {
    fn default() -> Self {
        StabilitySection {
            delta0_fraction: None,
            t: None,
            refine: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub name: String,
    /// Initial guess for `approx`, relative to the config file.
    pub guess: Option<PathBuf>,
    pub problem: ProblemSection,
    pub aliasing: AliasingSection,
    #[serde(default)]
    pub symbols: SymbolsSection,
    #[serde(default)]
    pub newton: NewtonSection,
    #[serde(default)]
    pub stability: StabilitySection,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg =
            Config::parse(&text).with_context(|| format!("in config {}", path.display()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Config> {
        let cfg: Config = toml::from_str(text)?;
        cfg.resolve()?;
        Ok(cfg)
    }

    pub fn guess_path(&self) -> Option<PathBuf> {
        self.guess.as_ref().map(|g| self.base_dir.join(g))
    }

    /// Validated, fully resolved parameters.
    pub fn resolve(&self) -> Result<ProblemParams> {
        let c = Interval::parse_decimal(&self.problem.c)
            .with_context(|| format!("wave speed {:?}", self.problem.c))?;
        let d1 = self.problem.d1.resolve()?;
        let d2 = self.problem.d2.resolve()?;
        SymbolParams::new(c, d2)?;
        let [a, b] = self.aliasing.nu;
        let apar = AnalyticityParams {
            nu: (a, b),
            nfft: (self.aliasing.nfft[0], self.aliasing.nfft[1]),
            amplitude: self.aliasing.amplitude,
            fft_mode: self.aliasing.fft_mode,
        };
        apar.validate()?;
        if let Some(f) = self.stability.delta0_fraction {
            if !(f > 0.0 && f < 1.0) {
                bail!("delta0_fraction must lie in (0, 1), got {f}");
            }
        }
        if !(self.newton.tol > 0.0) || self.newton.max_iter == 0 {
            bail!("newton tolerance and iteration cap must be positive");
        }
        Ok(ProblemParams {
            name: self.name.clone(),
            c: self.problem.c.clone(),
            c_enclosure: c,
            d1,
            d2,
            n0: self.problem.n0,
            n: self.problem.n,
            nfft: self.aliasing.nfft,
            nu: self.aliasing.nu,
            head_n1: self.aliasing.head_n1,
            amplitude: self.aliasing.amplitude,
            fft_mode: self.aliasing.fft_mode,
            kappa2_split: self.symbols.kappa2_split,
            kappa2_xi_cut: self.symbols.kappa2_xi_cut,
            delta0_fraction: self.stability.delta0_fraction,
            t: self.stability.t,
            refine: self.stability.refine,
        })
    }
}

/// Every parameter a certificate depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub name: String,
    pub c: String,
    pub c_enclosure: Interval,
    pub d1: f64,
    pub d2: f64,
    pub n0: [usize; 2],
    pub n: [usize; 2],
    pub nfft: [usize; 2],
    pub nu: [f64; 2],
    pub head_n1: usize,
    pub amplitude: AmplitudeMethod,
    pub fft_mode: FftMode,
    pub kappa2_split: usize,
    pub kappa2_xi_cut: f64,
    pub delta0_fraction: Option<f64>,
    pub t: Option<f64>,
    pub refine: bool,
}

impl ProblemParams {
    pub fn symbols(&self) -> Result<SymbolParams> {
        Ok(SymbolParams::new(self.c_enclosure, self.d2)?)
    }

    pub fn analyticity(&self) -> Result<AnalyticityParams> {
        let apar = AnalyticityParams {
            nu: (self.nu[0], self.nu[1]),
            nfft: (self.nfft[0], self.nfft[1]),
            amplitude: self.amplitude,
            fft_mode: self.fft_mode,
        };
        apar.validate()?;
        Ok(apar)
    }

    pub fn n0_box(&self) -> IndexBox {
        IndexBox::new(self.n0[0], self.n0[1])
    }

    pub fn n_box(&self) -> IndexBox {
        IndexBox::new(self.n[0], self.n[1])
    }

    /// Box on which `e^Ū` is enclosed entrywise.
    pub fn head_box(&self, ubar: IndexBox) -> IndexBox {
        ubar.union(&self.n_box().scaled(2))
            .union(&IndexBox::new(self.head_n1, 0))
    }
}
