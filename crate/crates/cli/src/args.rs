use std::path::PathBuf;

use clap::{Args, ValueEnum};
use ddtruss::{build_truss, ten_bar_config, LawParams, SolveSettings, TrussConfig, TrussModel};

use crate::error::CliError;
use crate::report::Report;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Chebyshev,
    Kernel,
}

impl Method {
    pub fn id(self) -> &'static str {
        match self {
            Method::Chebyshev => "chebyshev",
            Method::Kernel => "kernel",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct LawArgs {
    /// Material law: linear, ramberg_osgood or hyperbolic.
    #[arg(long)]
    pub law: String,
    /// Young's modulus, Pa.
    #[arg(long = "E")]
    pub modulus: Option<f64>,
    /// Hyperbolic law reference strain.
    #[arg(long)]
    pub ref_strain: Option<f64>,
    /// Ramberg–Osgood yield stress, Pa.
    #[arg(long)]
    pub yield_stress: Option<f64>,
    /// Ramberg–Osgood yield offset coefficient.
    #[arg(long = "ro-alpha")]
    pub ro_alpha: Option<f64>,
    /// Ramberg–Osgood hardening exponent.
    #[arg(long)]
    pub exponent: Option<f64>,
}

impl LawArgs {
    pub fn params(&self) -> LawParams {
        let d = LawParams::default();
        LawParams {
            modulus: self.modulus.unwrap_or(d.modulus),
            ref_strain: self.ref_strain.unwrap_or(d.ref_strain),
            yield_stress: self.yield_stress.unwrap_or(d.yield_stress),
            alpha: self.ro_alpha.unwrap_or(d.alpha),
            exponent: self.exponent.unwrap_or(d.exponent),
        }
    }
}

#[derive(Args, Debug)]
pub struct SurrogateArgs {
    /// Material dataset CSV with a `strain,stress` header.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Chebyshev)]
    pub method: Method,
    /// Chebyshev coefficient count before truncation [default: min(64, 4d)].
    #[arg(long = "N")]
    pub count: Option<usize>,
    /// Kernel bandwidth grid size for cross-validation.
    #[arg(long, default_value_t = 25, conflicts_with = "alpha")]
    pub grid_size: usize,
    /// Fixed kernel bandwidth (1/strain²); skips cross-validation.
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Args, Debug)]
pub struct TrussArgs {
    /// Truss definition in JSON.
    #[arg(long, required_unless_present = "ten_bar", conflicts_with = "ten_bar")]
    pub truss: Option<PathBuf>,
    /// Use the built-in two-bay, ten-member truss.
    #[arg(long)]
    pub ten_bar: bool,
    /// Ten-bar bay length, m [default: 1].
    #[arg(long = "L", conflicts_with = "truss")]
    pub length: Option<f64>,
    /// Ten-bar member area, m² [default: 1e-4].
    #[arg(long, conflicts_with = "truss")]
    pub area: Option<f64>,
    /// Ten-bar reference load per loaded node, N [default: 1000].
    #[arg(long, conflicts_with = "truss")]
    pub load: Option<f64>,
}

impl TrussArgs {
    pub fn build(&self, report: &mut Report) -> Result<TrussModel, CliError> {
        let config = match &self.truss {
            Some(path) => {
                report.config("truss", path.display());
                TrussConfig::load(path)?
            }
            None => {
                let (l, area, load) = (
                    self.length.unwrap_or(1.0),
                    self.area.unwrap_or(1e-4),
                    self.load.unwrap_or(1e3),
                );
                report.config("truss", "ten-bar");
                report.config_num("L", l);
                report.config_num("area", area);
                report.config_num("load", load);
                ten_bar_config(l, area, load)?
            }
        };
        Ok(build_truss(&config)?)
    }
}

#[derive(Args, Debug)]
pub struct SolverArgs {
    /// Residual tolerance relative to the applied load norm.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_rel: f64,
    /// Absolute residual tolerance, N.
    #[arg(long, default_value_t = 1e-12)]
    pub tol_abs: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
}

impl SolverArgs {
    pub fn settings(&self, report: &mut Report) -> Result<SolveSettings, CliError> {
        let s = SolveSettings {
            tol_rel: self.tol_rel,
            tol_abs: self.tol_abs,
            max_iter: self.max_iter,
            ..SolveSettings::default()
        };
        s.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        report.config_num("tol_rel", s.tol_rel);
        report.config_num("tol_abs", s.tol_abs);
        report.config("max_iter", s.max_iter);
        report.config_num("damping", s.damping);
        report.config("max_backtracks", s.max_backtracks);
        Ok(s)
    }
}

/// `a:b` strain interval.
pub fn parse_range(text: &str) -> Result<(f64, f64), String> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got `{text}`"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number `{a}`"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number `{b}`"))?;
    Ok((lo, hi))
}

/// Load multipliers from `start:end:count` (evenly spaced, ends included)
/// or a comma-separated list.
pub fn parse_lambdas(text: &str) -> Result<Vec<f64>, String> {
    let values: Vec<f64> = if let Some((range, count)) = text.rsplit_once(':').filter(|_| text.contains(':')) {
        let (start, end) = parse_range(range)?;
        let n: usize = count.trim().parse().map_err(|_| format!("bad count `{count}`"))?;
        match n {
            0 => return Err("count must be at least 1".into()),
            1 => vec![start],
            _ => (0..n)
                .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    } else {
        text.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad number `{s}`")))
            .collect::<Result<_, _>>()?
    };
    if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(format!(
            "load multipliers must be finite and strictly increasing: `{text}`"
        ));
    }
    Ok(values)
}
