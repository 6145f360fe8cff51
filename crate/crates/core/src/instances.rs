//! Instance generators and on-disk formats.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Instance, MatrixBidProfile, ScalarBidProfile};

/// Parameters of the two-player family whose equilibria all pick the
/// welfare-inferior assignment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Params {
    pub lambda: f64,
    pub eps: f64,
}

impl Theorem1Params {
    /// Requires `λ > 2` and `0 < ε < 1/2`.
    pub fn new(lambda: f64, eps: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 2.0) {
            return Err(Error::ParamOutOfRange(format!("lambda must exceed 2 (got {lambda})")));
        }
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::ParamOutOfRange(format!(
                "eps must lie in (0, 1/2) (got {eps})"
            )));
        }
        Ok(Theorem1Params { lambda, eps })
    }

    /// `LW(2,1) / LW(1,2) = 2λ / ((1+ε)λ + 1)`.
    pub fn ratio(&self) -> f64 {
        2.0 * self.lambda / ((1.0 + self.eps) * self.lambda + 1.0)
    }

    /// Equilibrium of GSP and VCG inducing (1,2): `b = (1+ε, 1)`.
    pub fn scalar_fixture(&self) -> ScalarBidProfile {
        ScalarBidProfile::new(vec![1.0 + self.eps, 1.0]).expect("finite bids")
    }

    /// EGFP equilibrium inducing (1,2): `b₁ = (1+δ, 0)`, `b₂ = (1, 0)`.
    pub fn egfp_fixture(&self, delta: f64) -> Result<MatrixBidProfile> {
        MatrixBidProfile::new(vec![vec![1.0 + delta, 0.0], vec![1.0, 0.0]])
    }
}

/// `v = (λ, 1)`, `c = (1+ε, 1)`, `α = (1, 1/λ)`.
pub fn gen_theorem1(p: Theorem1Params) -> Result<Instance> {
    let p = Theorem1Params::new(p.lambda, p.eps)?;
    Instance::new(
        vec![1.0, 1.0 / p.lambda],
        vec![p.lambda, 1.0],
        vec![1.0 + p.eps, 1.0],
    )
}

/// Ranges for [`gen_random`]. Draws are uniform on `(0, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomParams {
    pub ctr_max: f64,
    pub valuation_max: f64,
    /// Budget of player `i` is drawn from `(0, budget_factor · α₁ · v_i]`.
    pub budget_factor: f64,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            ctr_max: 1.0,
            valuation_max: 10.0,
            budget_factor: 2.0,
        }
    }
}

fn open_closed(rng: &mut ChaCha8Rng, max: f64) -> f64 {
    // gen::<f64>() is in [0, 1)
    max * (1.0 - rng.gen::<f64>())
}

/// Seeded random instance; CTRs are sorted after drawing.
pub fn gen_random(seed: u64, n: usize, params: &RandomParams) -> Result<Instance> {
    if n == 0 {
        return Err(Error::Empty);
    }
    if !(params.ctr_max > 0.0 && params.valuation_max > 0.0 && params.budget_factor > 0.0) {
        return Err(Error::ParamOutOfRange(format!("{params:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ctrs: Vec<f64> = (0..n).map(|_| open_closed(&mut rng, params.ctr_max)).collect();
    ctrs.sort_by(|a, b| b.total_cmp(a));
    let valuations: Vec<f64> = (0..n)
        .map(|_| open_closed(&mut rng, params.valuation_max))
        .collect();
    let budgets = valuations
        .iter()
        .map(|v| open_closed(&mut rng, params.budget_factor * ctrs[0] * v))
        .collect();
    Instance::new(ctrs, valuations, budgets)
}

/// Which generator produced an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "lowercase")]
pub enum Family {
    Theorem1(Theorem1Params),
    Random {
        n: usize,
        #[serde(flatten)]
        ranges: RandomParams,
    },
}

/// Reproducibility record written next to generated instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub family: Family,
}

impl Manifest {
    pub fn instance(&self) -> Result<Instance> {
        match &self.family {
            Family::Theorem1(p) => gen_theorem1(*p),
            Family::Random { n, ranges } => gen_random(self.seed.unwrap_or(0), *n, ranges),
        }
    }
}

pub fn read_instance<R: Read>(reader: R) -> Result<Instance> {
    Ok(serde_json::from_reader(reader)?)
}

pub fn write_instance<W: Write>(inst: &Instance, mut writer: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, inst)?;
    writeln!(writer)?;
    Ok(())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let text = fs::read_to_string(path)?;
    parse_instance(&text)
}

/// Parses the JSON instance schema. Syntax problems are `Parse`, schema
/// violations the matching validation error.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let raw: crate::model::RawInstance =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    crate::model::validate_instance(raw)
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let file = fs::File::create(path)?;
    write_instance(inst, std::io::BufWriter::new(file))
}
