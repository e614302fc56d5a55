//! Scenario schema: a strict, versioned, human-writable description of a
//! model plus a list of verification or computation tasks. Unknown fields
//! are rejected; numbers may be written as rationals ("3/7"), decimals
//! ("0.25" or 0.25), or complex pairs [re, im].

use cyclochar::matrix::Mat;
use cyclochar::scalar::{Rat, Scalar};
use num_bigint::BigInt;
use num_complex::Complex64;
use serde::Deserialize;
use std::str::FromStr;

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub model: Model,
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub options: Options,
}

#[derive(Deserialize, Debug)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Model {
    /// graded module (grading diag(I_p, -I_q), selfadjoint F) with an
    /// optional idempotent to pair against
    EvenModule {
        p: usize,
        q: usize,
        m: usize,
        f: MatrixSpec,
        #[serde(default)]
        idempotent: Option<MatrixSpec>,
    },
    /// ungraded module with an optional unitary to pair against
    OddModule {
        dim: usize,
        m: usize,
        f: MatrixSpec,
        #[serde(default)]
        unitary: Option<MatrixSpec>,
    },
    /// sign operator on Fourier modes -modes..modes with the truncated
    /// shift as unitary
    Winding { modes: usize, m: usize },
    /// seeded random cycle over matrix-valued exterior forms
    Matform { matrices: usize, generators: usize, degree: usize },
    EquivariantCircle,
    EquivariantTwoTorus,
    GvCircle,
    GvTwoTorus,
}

#[derive(Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    ComputeCharacter,
    VerifyBoundary,
    VerifyCocycle,
    IndexPairing,
    SpectralFlow,
    Transgression,
    GvSuite,
    FlatReplacement,
    SquareOneReduction,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::ComputeCharacter => "compute-character",
            Task::VerifyBoundary => "verify-boundary",
            Task::VerifyCocycle => "verify-cocycle",
            Task::IndexPairing => "index-pairing",
            Task::SpectralFlow => "spectral-flow",
            Task::Transgression => "transgression",
            Task::GvSuite => "gv-suite",
            Task::FlatReplacement => "flat-replacement",
            Task::SquareOneReduction => "square-one-reduction",
        }
    }

    /// quadrature-backed pairings get the looser default tolerance
    pub fn default_tol(&self) -> f64 {
        match self {
            Task::IndexPairing | Task::SpectralFlow => 1e-6,
            _ => 1e-9,
        }
    }
}

#[derive(Deserialize, Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    Exact,
    Float,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default)]
    pub kernel: Option<Kernel>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_budget() -> usize {
    1_000_000
}

fn default_threads() -> usize {
    1
}

impl Default for Options {
    fn default() -> Self {
        Options {
            kernel: None,
            tol: None,
            budget: default_budget(),
            threads: default_threads(),
            seed: 0,
        }
    }
}

/// a matrix is a row-major list of rows of complex entries
pub type MatrixSpec = Vec<Vec<ComplexSpec>>;

#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum ComplexSpec {
    Real(NumberSpec),
    Pair([NumberSpec; 2]),
}

#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum NumberSpec {
    Text(String),
    Value(f64),
}

fn parse_rat(text: &str) -> Result<Rat, String> {
    let t = text.trim();
    if let Ok(r) = Rat::from_str(t) {
        return Ok(r);
    }
    // finite decimal: shift the point into a power-of-ten denominator
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1, t),
    };
    if let Some((int_part, frac_part)) = body.split_once('.') {
        let digits = format!("{int_part}{frac_part}");
        let num = BigInt::from_str(&digits).map_err(|e| e.to_string())?;
        let den = BigInt::from(10u32).pow(frac_part.len() as u32);
        return Ok(Rat::new(num * BigInt::from(sign), den));
    }
    Err(format!("cannot parse `{text}` as a rational"))
}

impl NumberSpec {
    pub fn to_rat(&self) -> Result<Rat, String> {
        match self {
            NumberSpec::Text(t) => parse_rat(t),
            NumberSpec::Value(v) => {
                Rat::from_float(*v).ok_or_else(|| format!("non-finite number {v}"))
            }
        }
    }

    pub fn to_f64(&self) -> Result<f64, String> {
        match self {
            NumberSpec::Text(t) => {
                if let Ok(v) = f64::from_str(t.trim()) {
                    return Ok(v);
                }
                let r = parse_rat(t)?;
                Ok(rat_to_f64(&r))
            }
            NumberSpec::Value(v) => Ok(*v),
        }
    }
}

fn rat_to_f64(r: &Rat) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

impl ComplexSpec {
    pub fn to_scalar(&self, kernel: Kernel) -> Result<Scalar, String> {
        let (re, im) = match self {
            ComplexSpec::Real(r) => (r.clone(), None),
            ComplexSpec::Pair([r, i]) => (r.clone(), Some(i.clone())),
        };
        match kernel {
            Kernel::Exact => {
                let mut s = Scalar::from_rat(re.to_rat()?);
                if let Some(i) = im {
                    s = s.add(&Scalar::from_rat(i.to_rat()?).mul(&Scalar::i()));
                }
                Ok(s)
            }
            Kernel::Float => {
                let re = re.to_f64()?;
                let im = match im {
                    Some(i) => i.to_f64()?,
                    None => 0.0,
                };
                Ok(Scalar::float(Complex64::new(re, im)))
            }
        }
    }
}

pub fn parse_matrix(entries: &MatrixSpec, dim: usize, kernel: Kernel) -> Result<Mat, String> {
    if entries.len() != dim {
        return Err(format!("matrix has {} rows, expected {dim}", entries.len()));
    }
    let mut m = Mat::zeros(dim, dim);
    for (i, row) in entries.iter().enumerate() {
        if row.len() != dim {
            return Err(format!("row {i} has {} entries, expected {dim}", row.len()));
        }
        for (j, e) in row.iter().enumerate() {
            m[(i, j)] = e.to_scalar(kernel)?;
        }
    }
    Ok(m)
}
