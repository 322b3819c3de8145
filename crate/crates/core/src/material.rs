//! Uniaxial strain–stress datasets: validation, CSV persistence and
//! synthetic generation from analytic laws.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use thiserror::Error;

/// Header line required at the top of every dataset CSV.
pub const CSV_HEADER: &str = "strain,stress";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read dataset {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write dataset {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing or wrong header: expected `{CSV_HEADER}`, found `{0}`")]
    Header(String),
    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("non-finite value in point {index} (strain {strain}, stress {stress})")]
    NonFinite { index: usize, strain: f64, stress: f64 },
    #[error("dataset needs at least 2 distinct strains, got {0}")]
    TooFewPoints(usize),
    #[error("unknown material law `{0}` (valid laws: linear, ramberg_osgood, hyperbolic)")]
    UnknownLaw(String),
    #[error("invalid law parameter: {0}")]
    InvalidLaw(String),
    #[error("invalid synthesis request: {0}")]
    InvalidSynth(String),
}

/// One observed (strain, stress) pair. Stress in Pa, strain dimensionless.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialPoint {
    pub strain: f64,
    pub stress: f64,
}

impl MaterialPoint {
    pub fn new(strain: f64, stress: f64) -> Self {
        Self { strain, stress }
    }
}

/// Canonical dataset: strains strictly increasing, at least two points,
/// every value finite. Only constructible through [`MaterialDataset::new`].
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialDataset {
    points: Vec<MaterialPoint>,
}

impl MaterialDataset {
    /// Validates and canonicalizes raw points: sorts by strain and merges
    /// entries sharing a strain by averaging their stresses.
    pub fn new(points: Vec<MaterialPoint>) -> Result<Self, DatasetError> {
        for (index, p) in points.iter().enumerate() {
            if !p.strain.is_finite() || !p.stress.is_finite() {
                return Err(DatasetError::NonFinite {
                    index,
                    strain: p.strain,
                    stress: p.stress,
                });
            }
        }
        let mut sorted = points;
        sorted.sort_by(|a, b| a.strain.total_cmp(&b.strain));

        let mut merged: Vec<MaterialPoint> = Vec::with_capacity(sorted.len());
        let mut i = 0;
        while i < sorted.len() {
            let strain = sorted[i].strain;
            let mut j = i;
            let mut sum = 0.0;
            while j < sorted.len() && sorted[j].strain == strain {
                sum += sorted[j].stress;
                j += 1;
            }
            merged.push(MaterialPoint::new(strain, sum / (j - i) as f64));
            i = j;
        }
        if merged.len() < 2 {
            return Err(DatasetError::TooFewPoints(merged.len()));
        }
        Ok(Self { points: merged })
    }

    pub fn points(&self) -> &[MaterialPoint] {
        &self.points
    }

    /// Number of distinct points `d`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn strain_min(&self) -> f64 {
        self.points[0].strain
    }

    pub fn strain_max(&self) -> f64 {
        self.points[self.points.len() - 1].strain
    }

    /// `strain_max - strain_min`, always positive.
    pub fn strain_range(&self) -> f64 {
        self.strain_max() - self.strain_min()
    }

    pub fn strains(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.strain)
    }

    pub fn stresses(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.stress)
    }

    /// Piecewise-linear interpolant through the sorted points. Queries
    /// outside the strain range are clamped to the end values.
    pub fn interpolate(&self, strain: f64) -> f64 {
        let pts = &self.points;
        if strain <= pts[0].strain {
            return pts[0].stress;
        }
        let last = pts.len() - 1;
        if strain >= pts[last].strain {
            return pts[last].stress;
        }
        // first index with point.strain > strain; 1..=last here
        let hi = pts.partition_point(|p| p.strain <= strain);
        let (p0, p1) = (pts[hi - 1], pts[hi]);
        let t = (strain - p0.strain) / (p1.strain - p0.strain);
        p0.stress + t * (p1.stress - p0.stress)
    }

    /// Parses CSV text with a mandatory `strain,stress` header. LF and CRLF
    /// line endings are accepted; blank lines and `#` comment lines are
    /// skipped.
    pub fn from_csv_str(text: &str) -> Result<Self, DatasetError> {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        let mut lines = text.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((_, l)) if l.trim().is_empty() || l.trim_start().starts_with('#') => continue,
                Some((_, l)) => break l.trim(),
                None => return Err(DatasetError::Header(String::new())),
            }
        };
        if header.replace(' ', "") != CSV_HEADER {
            return Err(DatasetError::Header(header.to_string()));
        }

        let mut points = Vec::new();
        for (idx, line) in lines {
            let row = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(DatasetError::MalformedRow {
                    row,
                    reason: format!("expected 2 fields, found {}", fields.len()),
                });
            }
            let parse = |s: &str, name: &str| {
                s.parse::<f64>().map_err(|_| DatasetError::MalformedRow {
                    row,
                    reason: format!("cannot parse {name} `{s}`"),
                })
            };
            let strain = parse(fields[0], "strain")?;
            let stress = parse(fields[1], "stress")?;
            if !strain.is_finite() || !stress.is_finite() {
                return Err(DatasetError::MalformedRow {
                    row,
                    reason: "non-finite value".to_string(),
                });
            }
            points.push(MaterialPoint::new(strain, stress));
        }
        Self::new(points)
    }

    /// CSV text written with LF endings and 17 significant digits, enough
    /// for an exact `f64` round trip.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(40 * (self.points.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(out, "{:.16e},{:.16e}", p.strain, p.stress);
        }
        out
    }
}

/// Reads a dataset CSV from disk.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<MaterialDataset, DatasetError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Read {
        path: path.display().to_string(),
        source,
    })?;
    MaterialDataset::from_csv_str(&text)
}

pub fn save_dataset(dataset: &MaterialDataset, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path = path.as_ref();
    fs::write(path, dataset.to_csv_string()).map_err(|source| DatasetError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Analytic uniaxial laws used to synthesize datasets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MaterialLaw {
    /// σ = E ε
    Linear { modulus: f64 },
    /// ε = σ/E + α (σ/E) (|σ|/σ₀)^(n−1), inverted numerically for σ.
    RambergOsgood {
        modulus: f64,
        yield_stress: f64,
        alpha: f64,
        exponent: f64,
    },
    /// σ = E ε / (1 + |ε|/ε_ref)
    Hyperbolic { modulus: f64, ref_strain: f64 },
}

impl MaterialLaw {
    pub const IDS: [&'static str; 3] = ["linear", "ramberg_osgood", "hyperbolic"];

    /// Builds a law from its id and named parameters. Missing parameters
    /// take the values of [`LawParams::default`].
    pub fn from_id(id: &str, params: &LawParams) -> Result<Self, DatasetError> {
        let law = match id {
            "linear" => MaterialLaw::Linear {
                modulus: params.modulus,
            },
            "ramberg_osgood" => MaterialLaw::RambergOsgood {
                modulus: params.modulus,
                yield_stress: params.yield_stress,
                alpha: params.alpha,
                exponent: params.exponent,
            },
            "hyperbolic" => MaterialLaw::Hyperbolic {
                modulus: params.modulus,
                ref_strain: params.ref_strain,
            },
            other => return Err(DatasetError::UnknownLaw(other.to_string())),
        };
        law.validate()?;
        Ok(law)
    }

    pub fn id(&self) -> &'static str {
        match self {
            MaterialLaw::Linear { .. } => "linear",
            MaterialLaw::RambergOsgood { .. } => "ramberg_osgood",
            MaterialLaw::Hyperbolic { .. } => "hyperbolic",
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(DatasetError::InvalidLaw(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        match *self {
            MaterialLaw::Linear { modulus } => positive("E", modulus),
            MaterialLaw::RambergOsgood {
                modulus,
                yield_stress,
                alpha,
                exponent,
            } => {
                positive("E", modulus)?;
                positive("sigma0", yield_stress)?;
                if !(alpha.is_finite() && alpha >= 0.0) {
                    return Err(DatasetError::InvalidLaw(format!("alpha must be >= 0, got {alpha}")));
                }
                if !(exponent.is_finite() && exponent >= 1.0) {
                    return Err(DatasetError::InvalidLaw(format!("n must be >= 1, got {exponent}")));
                }
                Ok(())
            }
            MaterialLaw::Hyperbolic { modulus, ref_strain } => {
                positive("E", modulus)?;
                positive("eps_ref", ref_strain)
            }
        }
    }

    /// Stress at the given strain.
    pub fn stress(&self, strain: f64) -> f64 {
        match *self {
            MaterialLaw::Linear { modulus } => modulus * strain,
            MaterialLaw::Hyperbolic { modulus, ref_strain } => modulus * strain / (1.0 + strain.abs() / ref_strain),
            MaterialLaw::RambergOsgood {
                modulus,
                yield_stress,
                alpha,
                exponent,
            } => {
                let strain_of =
                    |s: f64| s / modulus + alpha * (s / modulus) * (s.abs() / yield_stress).powf(exponent - 1.0);
                // strain_of is odd and increasing with |σ| ≤ E|ε|
                let mut lo = -modulus * strain.abs();
                let mut hi = modulus * strain.abs();
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid == lo || mid == hi {
                        break;
                    }
                    if strain_of(mid) < strain {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

/// Named parameters for [`MaterialLaw::from_id`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LawParams {
    pub modulus: f64,
    pub ref_strain: f64,
    pub yield_stress: f64,
    pub alpha: f64,
    pub exponent: f64,
}

impl Default for LawParams {
    fn default() -> Self {
        Self {
            modulus: 200e9,
            ref_strain: 0.002,
            yield_stress: 250e6,
            alpha: 3.0 / 7.0,
            exponent: 5.0,
        }
    }
}

/// Arguments of [`synth_dataset`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthSpec {
    pub law: MaterialLaw,
    pub count: usize,
    pub strain_range: (f64, f64),
    /// Standard deviation of additive stress noise, Pa.
    pub noise_std: f64,
    /// Uniform strain jitter as a fraction of the grid spacing, in [0, 0.5).
    pub jitter: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(law: MaterialLaw, count: usize, strain_range: (f64, f64), noise_std: f64, seed: u64) -> Self {
        Self {
            law,
            count,
            strain_range,
            noise_std,
            jitter: 0.0,
            seed,
        }
    }
}

/// Samples `count` points of the law on an evenly spaced strain grid,
/// with Gaussian stress noise drawn from a seeded generator.
pub fn synth_dataset(spec: &SynthSpec) -> Result<MaterialDataset, DatasetError> {
    spec.law.validate()?;
    let (lo, hi) = spec.strain_range;
    if spec.count < 2 {
        return Err(DatasetError::InvalidSynth(format!(
            "n must be >= 2, got {}",
            spec.count
        )));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(DatasetError::InvalidSynth(format!(
            "strain range must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    if !(spec.noise_std.is_finite() && spec.noise_std >= 0.0) {
        return Err(DatasetError::InvalidSynth(format!(
            "noise must be >= 0, got {}",
            spec.noise_std
        )));
    }
    if !(spec.jitter.is_finite() && (0.0..0.5).contains(&spec.jitter)) {
        return Err(DatasetError::InvalidSynth(format!(
            "jitter must lie in [0, 0.5), got {}",
            spec.jitter
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_std).map_err(|e| DatasetError::InvalidSynth(e.to_string()))?;
    let unit = Uniform::new_inclusive(-1.0, 1.0).map_err(|e| DatasetError::InvalidSynth(e.to_string()))?;
    let spacing = (hi - lo) / (spec.count - 1) as f64;

    let points = (0..spec.count)
        .map(|i| {
            let mut strain = lo + (hi - lo) * i as f64 / (spec.count - 1) as f64;
            if spec.jitter > 0.0 && i > 0 && i + 1 < spec.count {
                strain += spec.jitter * spacing * unit.sample(&mut rng);
            }
            let mut stress = spec.law.stress(strain);
            if spec.noise_std > 0.0 {
                stress += noise.sample(&mut rng);
            }
            MaterialPoint::new(strain, stress)
        })
        .collect();
    MaterialDataset::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(raw: &[(f64, f64)]) -> Vec<MaterialPoint> {
        raw.iter().map(|&(e, s)| MaterialPoint::new(e, s)).collect()
    }

    #[test]
    fn minimal_csv() {
        let d = MaterialDataset::from_csv_str("strain,stress\n0,0\n0.01,2e6\n").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.strain_min(), 0.0);
        assert_eq!(d.points()[1], MaterialPoint::new(0.01, 2e6));
    }

    #[test]
    fn unsorted_rows_are_sorted() {
        let a = MaterialDataset::from_csv_str("strain,stress\n0.01,2e6\n0,0\n").unwrap();
        let b = MaterialDataset::from_csv_str("strain,stress\n0,0\n0.01,2e6\n").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn duplicate_strains_average() {
        let d = MaterialDataset::from_csv_str("strain,stress\r\n0,0\r\n0,4\r\n0.01,2e6\r\n").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.points()[0], MaterialPoint::new(0.0, 2.0));
    }

    #[test]
    fn csv_comments_skipped() {
        let d = MaterialDataset::from_csv_str("# made by synth\n# seed = 1\nstrain,stress\n# row note\n0,0\n1,2\n")
            .unwrap();
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(
            MaterialDataset::from_csv_str("stress,strain\n0,0\n1,1\n"),
            Err(DatasetError::Header(_))
        ));
        match MaterialDataset::from_csv_str("strain,stress\n0,0\n1,abc\n") {
            Err(DatasetError::MalformedRow { row, .. }) => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            MaterialDataset::from_csv_str("strain,stress\n0,0\n1,2,3\n"),
            Err(DatasetError::MalformedRow { row: 3, .. })
        ));
        assert!(matches!(
            MaterialDataset::from_csv_str("strain,stress\n0,0\n1,inf\n"),
            Err(DatasetError::MalformedRow { row: 3, .. })
        ));
        assert!(matches!(
            MaterialDataset::from_csv_str("strain,stress\n0,0\n"),
            Err(DatasetError::TooFewPoints(1))
        ));
        assert!(matches!(
            MaterialDataset::from_csv_str("strain,stress\n0,0\n0,1\n"),
            Err(DatasetError::TooFewPoints(1))
        ));
    }

    #[test]
    fn checked_constructor_rejects_nan() {
        let err = MaterialDataset::new(pts(&[(0.0, 0.0), (f64::NAN, 1.0)])).unwrap_err();
        assert!(matches!(err, DatasetError::NonFinite { index: 1, .. }));
    }

    #[test]
    fn missing_file() {
        let err = load_dataset("/nonexistent/dir/data.csv").unwrap_err();
        assert!(matches!(err, DatasetError::Read { .. }));
    }

    #[test]
    fn interpolation() {
        let d = MaterialDataset::new(pts(&[(0.0, 0.0), (1.0, 10.0), (3.0, 14.0)])).unwrap();
        assert_eq!(d.interpolate(0.5), 5.0);
        assert_eq!(d.interpolate(2.0), 12.0);
        assert_eq!(d.interpolate(1.0), 10.0);
        assert_eq!(d.interpolate(-1.0), 0.0);
        assert_eq!(d.interpolate(4.0), 14.0);
    }

    #[test]
    fn zero_noise_linear_synth() {
        let law = MaterialLaw::Linear { modulus: 200e9 };
        let d = synth_dataset(&SynthSpec::new(law, 5, (0.0, 0.01), 0.0, 1)).unwrap();
        assert_eq!(d.len(), 5);
        for (i, p) in d.points().iter().enumerate() {
            assert_eq!(p.strain, 0.01 * i as f64 / 4.0);
            assert_eq!(p.stress, 200e9 * p.strain);
        }
    }

    #[test]
    fn synth_is_deterministic() {
        let law = MaterialLaw::Hyperbolic {
            modulus: 1e9,
            ref_strain: 0.01,
        };
        let mut spec = SynthSpec::new(law, 30, (-0.02, 0.02), 1e5, 7);
        spec.jitter = 0.3;
        let a = synth_dataset(&spec).unwrap();
        let b = synth_dataset(&spec).unwrap();
        assert_eq!(a.to_csv_string(), b.to_csv_string());
        spec.seed = 8;
        assert_ne!(a, synth_dataset(&spec).unwrap());
    }

    #[test]
    fn hyperbolic_middle_point() {
        // 1e9 * 0.01 / (1 + 0.01/0.01)
        let law = MaterialLaw::Hyperbolic {
            modulus: 1e9,
            ref_strain: 0.01,
        };
        let d = synth_dataset(&SynthSpec::new(law, 3, (0.0, 0.02), 0.0, 0)).unwrap();
        assert_eq!(d.points()[1].strain, 0.01);
        assert!((d.points()[1].stress - 5e6).abs() <= 5e6 * 1e-15);
    }

    #[test]
    fn ramberg_osgood_inverts_its_strain_relation() {
        let (e, s0, a, n) = (200e9, 250e6, 3.0 / 7.0, 5.0);
        let law = MaterialLaw::RambergOsgood {
            modulus: e,
            yield_stress: s0,
            alpha: a,
            exponent: n,
        };
        for &strain in &[-0.004, -1e-3, 0.0, 5e-4, 2e-3, 0.01] {
            let s: f64 = law.stress(strain);
            let back = s / e + a * (s / e) * (s.abs() / s0).powf(n - 1.0);
            assert!((back - strain).abs() <= 1e-15, "{strain} -> {s} -> {back}");
        }
    }

    #[test]
    fn law_validation() {
        let p = LawParams {
            modulus: 0.0,
            ..LawParams::default()
        };
        assert!(matches!(
            MaterialLaw::from_id("linear", &p),
            Err(DatasetError::InvalidLaw(_))
        ));
        assert!(matches!(
            MaterialLaw::from_id("bogus", &LawParams::default()),
            Err(DatasetError::UnknownLaw(_))
        ));
        let law = MaterialLaw::Linear { modulus: 1.0 };
        assert!(synth_dataset(&SynthSpec::new(law, 1, (0.0, 1.0), 0.0, 0)).is_err());
        assert!(synth_dataset(&SynthSpec::new(law, 3, (1.0, 1.0), 0.0, 0)).is_err());
        assert!(synth_dataset(&SynthSpec::new(law, 3, (0.0, 1.0), -1.0, 0)).is_err());
    }
}
