//! Pure-state Monte Carlo of the random walk.
//!
//! Each step picks a clause uniformly, measures its projector, and on
//! outcome 1 scrambles one of the clause's two qubits with a Haar-random
//! unitary. Averaging over trajectories reproduces the exact channel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::densesim::{self, expectation, standard_complex, HermitianOp, Matrix2, StateVector};
use crate::instance::{Clause, Instance};
use crate::{Error, Result, C64};

/// Squared-norm floor below which a measurement branch is treated as empty.
pub const BRANCH_FLOOR: f64 = 1e-14;
/// Trajectories per aggregation chunk. Fixed so that floating-point sums do
/// not depend on the worker count.
const CHUNK: usize = 64;

/// Haar-random element of U(2).
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R) -> Matrix2 {
    let z: [C64; 4] = std::array::from_fn(|_| standard_complex(rng));
    // Gram-Schmidt on the columns; R then has a positive real diagonal
    let n0 = (z[0].norm_sqr() + z[2].norm_sqr()).sqrt();
    let (a, c) = (z[0] / n0, z[2] / n0);
    let proj = a.conj() * z[1] + c.conj() * z[3];
    let (mut b, mut d) = (z[1] - proj * a, z[3] - proj * c);
    let n1 = (b.norm_sqr() + d.norm_sqr()).sqrt();
    b /= n1;
    d /= n1;
    Matrix2::new(a, b, c, d)
}

/// Uniformly random computational basis state, an unraveling of I/2ⁿ.
pub fn sample_initial_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StateVector {
    let index = rng.random_range(0..densesim::dim(n));
    StateVector::basis(n, index).expect("index below 2^n")
}

/// Result of one measurement step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    /// Index of the measured clause.
    pub clause: usize,
    /// Measurement outcome: 1 means the clause was violated.
    pub outcome: u8,
}

// Splits ψ into Φψ (returned) and (1 − Φ)ψ (left in place).
fn split(psi: &mut StateVector, clause: &Clause) -> Vec<C64> {
    let n = psi.n();
    let (si, sj) = (
        1usize << densesim::shift(clause.i(), n),
        1usize << densesim::shift(clause.j(), n),
    );
    let offsets = [0, sj, si, si | sj];
    let phi = clause.amps();
    let amps = psi.amps_mut();
    let mut violated = vec![C64::new(0.0, 0.0); amps.len()];
    for base in 0..amps.len() {
        if base & (si | sj) != 0 {
            continue;
        }
        let mut overlap = C64::new(0.0, 0.0);
        for k in 0..4 {
            overlap += phi[k].conj() * amps[base | offsets[k]];
        }
        for k in 0..4 {
            let v = phi[k] * overlap;
            violated[base | offsets[k]] = v;
            amps[base | offsets[k]] -= v;
        }
    }
    violated
}

/// One step of the walk, updating ψ in place.
///
/// If the sampled branch has squared norm below [`BRANCH_FLOOR`] (possible
/// only at the clamped edges of the outcome probability) the other outcome
/// is taken instead. `DegenerateBranch` is returned only if both are empty.
pub fn trajectory_step<R: Rng + ?Sized>(
    psi: &mut StateVector,
    inst: &Instance,
    rng: &mut R,
) -> Result<Step> {
    if psi.n() != inst.n() {
        return Err(Error::DimensionMismatch {
            expected: densesim::dim(inst.n()),
            found: densesim::dim(psi.n()),
        });
    }
    let alpha = rng.random_range(0..inst.num_clauses());
    let clause = &inst.clauses()[alpha];
    let violated = split(psi, clause);
    let w1: f64 = violated.iter().map(|a| a.norm_sqr()).sum();
    let w0 = psi.amplitudes().norm_squared();
    let p1 = w1.clamp(0.0, 1.0);
    let mut outcome = u8::from(rng.random::<f64>() < p1);
    if outcome == 1 && w1 < BRANCH_FLOOR {
        outcome = 0;
    } else if outcome == 0 && w0 < BRANCH_FLOOR {
        outcome = 1;
    }
    let weight = if outcome == 1 { w1 } else { w0 };
    if weight < BRANCH_FLOOR {
        return Err(Error::DegenerateBranch { norm_sqr: weight });
    }
    if outcome == 1 {
        psi.amps_mut().copy_from_slice(&violated);
        psi.renormalize();
        let q = if rng.random_bool(0.5) {
            clause.i()
        } else {
            clause.j()
        };
        let u = haar_unitary(rng);
        psi.apply_single(&u, q)?;
    } else {
        psi.renormalize();
    }
    Ok(Step {
        clause: alpha,
        outcome,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub n0: usize,
    pub steps: usize,
    /// Outcome bits, kept on request.
    pub outcomes: Option<Vec<u8>>,
    pub final_state: Option<StateVector>,
    pub seed: u64,
}

/// RNG for trajectory `index` of an ensemble: the master seed picks the key,
/// the index picks the stream.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Runs T steps from a random basis state, calling `observe(t, ψ_t)` for
/// t = 0..=T.
pub fn run_trajectory_observed<R, F>(
    inst: &Instance,
    steps: usize,
    rng: &mut R,
    keep_history: bool,
    mut observe: F,
) -> Result<(usize, Option<Vec<u8>>, StateVector)>
where
    R: Rng + ?Sized,
    F: FnMut(usize, &StateVector) -> Result<()>,
{
    let mut psi = sample_initial_state(inst.n(), rng);
    let mut outcomes = keep_history.then(|| Vec::with_capacity(steps));
    let mut n0 = 0;
    observe(0, &psi)?;
    for t in 0..steps {
        let step = trajectory_step(&mut psi, inst, rng)?;
        if step.outcome == 0 {
            n0 += 1;
        }
        if let Some(o) = outcomes.as_mut() {
            o.push(step.outcome);
        }
        observe(t + 1, &psi)?;
    }
    Ok((n0, outcomes, psi))
}

/// One trajectory of `steps` measurements seeded by `seed`.
pub fn run_trajectory(
    inst: &Instance,
    steps: usize,
    seed: u64,
    keep_history: bool,
) -> Result<TrajectoryRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n0, outcomes, psi) =
        run_trajectory_observed(inst, steps, &mut rng, keep_history, |_, _| Ok(()))?;
    Ok(TrajectoryRecord {
        n0,
        steps,
        outcomes,
        final_state: keep_history.then_some(psi),
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub m: usize,
    pub steps: usize,
    pub master_seed: u64,
    /// N0 of each trajectory, by index.
    pub n0: Vec<usize>,
    pub mean_n0: f64,
    pub stddev_n0: f64,
    /// Fraction of trajectories with outcome 0 at step t, for t = 0..T−1.
    pub zero_frequency: Vec<f64>,
    /// `observable_means[k][t]`: ensemble mean of ⟨ψ_t|A_k|ψ_t⟩, t = 0..=T.
    pub observable_means: Vec<Vec<f64>>,
    /// Standard errors matching `observable_means`.
    pub observable_stderr: Vec<Vec<f64>>,
}

impl EnsembleStats {
    pub fn stderr_n0(&self) -> f64 {
        self.stddev_n0 / (self.m as f64).sqrt()
    }

    /// CSV `trajectory_index,N0`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trajectory_index,N0\n");
        for (i, v) in self.n0.iter().enumerate() {
            out.push_str(&format!("{i},{v}\n"));
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "M": self.m,
            "T": self.steps,
            "mean_N0": self.mean_n0,
            "stddev_N0": self.stddev_n0,
            "master_seed": self.master_seed,
        })
    }
}

struct Partial {
    n0: Vec<usize>,
    zeros: Vec<usize>,
    sum: Vec<Vec<f64>>,
    sum_sq: Vec<Vec<f64>>,
}

fn run_chunk(
    inst: &Instance,
    steps: usize,
    range: std::ops::Range<usize>,
    master_seed: u64,
    observables: &[HermitianOp],
) -> Result<Partial> {
    let mut p = Partial {
        n0: Vec::with_capacity(range.len()),
        zeros: vec![0; steps],
        sum: vec![vec![0.0; steps + 1]; observables.len()],
        sum_sq: vec![vec![0.0; steps + 1]; observables.len()],
    };
    for index in range {
        let mut rng = trajectory_rng(master_seed, index as u64);
        let (sum, sum_sq) = (&mut p.sum, &mut p.sum_sq);
        let (n0, outcomes, _) = run_trajectory_observed(inst, steps, &mut rng, true, |t, psi| {
            for (k, a) in observables.iter().enumerate() {
                let v = expectation(a, psi)?;
                sum[k][t] += v;
                sum_sq[k][t] += v * v;
            }
            Ok(())
        })?;
        for (t, &o) in outcomes.expect("history kept").iter().enumerate() {
            if o == 0 {
                p.zeros[t] += 1;
            }
        }
        p.n0.push(n0);
    }
    Ok(p)
}

/// M independent trajectories. Results are bit-identical for any `workers`.
pub fn run_ensemble(
    inst: &Instance,
    steps: usize,
    m: usize,
    master_seed: u64,
    workers: usize,
) -> Result<EnsembleStats> {
    run_ensemble_with(inst, steps, m, master_seed, workers, &[])
}

/// [`run_ensemble`] that also averages the given observables at every step.
pub fn run_ensemble_with(
    inst: &Instance,
    steps: usize,
    m: usize,
    master_seed: u64,
    workers: usize,
    observables: &[HermitianOp],
) -> Result<EnsembleStats> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "ensemble size M must be at least 1".into(),
        ));
    }
    for a in observables {
        if a.n() != inst.n() {
            return Err(Error::DimensionMismatch {
                expected: densesim::dim(inst.n()),
                found: densesim::dim(a.n()),
            });
        }
    }
    let chunks: Vec<_> = (0..m)
        .step_by(CHUNK)
        .map(|s| s..(s + CHUNK).min(m))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let partials: Vec<Result<Partial>> = pool.install(|| {
        chunks
            .into_par_iter()
            .map(|r| run_chunk(inst, steps, r, master_seed, observables))
            .collect()
    });

    let k = observables.len();
    let mut n0 = Vec::with_capacity(m);
    let mut zeros = vec![0usize; steps];
    let mut sum = vec![vec![0.0; steps + 1]; k];
    let mut sum_sq = vec![vec![0.0; steps + 1]; k];
    for p in partials {
        let p = p?;
        n0.extend(p.n0);
        for (z, pz) in zeros.iter_mut().zip(&p.zeros) {
            *z += pz;
        }
        for a in 0..k {
            for t in 0..=steps {
                sum[a][t] += p.sum[a][t];
                sum_sq[a][t] += p.sum_sq[a][t];
            }
        }
    }

    let mf = m as f64;
    let mean_n0 = n0.iter().sum::<usize>() as f64 / mf;
    let stddev_n0 = if m > 1 {
        let ss: f64 = n0.iter().map(|&v| (v as f64 - mean_n0).powi(2)).sum();
        (ss / (mf - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut observable_means = Vec::with_capacity(k);
    let mut observable_stderr = Vec::with_capacity(k);
    for a in 0..k {
        let means: Vec<f64> = sum[a].iter().map(|s| s / mf).collect();
        let se = sum_sq[a]
            .iter()
            .zip(&means)
            .map(|(sq, mu)| {
                if m > 1 {
                    ((sq - mf * mu * mu).max(0.0) / (mf - 1.0) / mf).sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        observable_means.push(means);
        observable_stderr.push(se);
    }
    Ok(EnsembleStats {
        m,
        steps,
        master_seed,
        n0,
        mean_n0,
        stddev_n0,
        zero_frequency: zeros.iter().map(|&z| z as f64 / mf).collect(),
        observable_means,
        observable_stderr,
    })
}
