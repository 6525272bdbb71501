//! Invariant suites shared by the `verify` command and the tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{self, SnapshotSchedule};
use crate::densesim::DensityMatrix;
use crate::instance::{ClauseForm, Instance};
use crate::observables;
use crate::trajectory;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Conservation of Ŝ and the Ŝ² increment on restricted instances.
    Lemma1,
    /// Per-clause dual-map identities.
    Dual,
    /// Trajectory ensemble against the exact channel.
    Oracle,
    /// Cumulative energy bound (2/L) Σ tr[Hρ_t] ≤ 5n².
    Appendix,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Lemma1, Suite::Dual, Suite::Oracle, Suite::Appendix];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma1 => "lemma1",
            Suite::Dual => "dual",
            Suite::Oracle => "oracle",
            Suite::Appendix => "appendix",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Random mixed states per instance for the identity checks.
    pub states: usize,
    pub tolerance: f64,
    pub oracle_trajectories: usize,
    pub oracle_steps: usize,
    pub energy_steps: usize,
    pub workers: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            states: 5,
            tolerance: 1e-9,
            oracle_trajectories: 2000,
            oracle_steps: 20,
            energy_steps: 2000,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub suite: Suite,
    pub instance: usize,
    pub invariant: String,
    pub passed: bool,
    pub detail: String,
}

fn check(suite: Suite, instance: usize, invariant: &str, passed: bool, detail: String) -> Check {
    Check {
        suite,
        instance,
        invariant: invariant.to_string(),
        passed,
        detail,
    }
}

fn is_restricted(inst: &Instance) -> bool {
    inst.planted_basis().is_some()
        && inst
            .clause_forms()
            .iter()
            .all(|f| *f == ClauseForm::RestrictedTypeI)
}

fn is_planted(inst: &Instance) -> bool {
    inst.planted_basis().is_some()
        && inst
            .clause_forms()
            .iter()
            .all(|f| matches!(f, ClauseForm::RestrictedTypeI | ClauseForm::TypeII))
}

fn random_states(n: usize, count: usize, seed: u64) -> Vec<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| DensityMatrix::random(n, &mut rng))
        .collect()
}

/// |ΔS| and |ΔS² − (2/L) tr[Hρ]| over one channel step, maximized over states.
pub fn lemma1_residual(inst: &Instance, states: &[DensityMatrix]) -> Result<(f64, f64)> {
    let l = inst.num_clauses() as f64;
    let (mut ds, mut ds2) = (0.0f64, 0.0f64);
    for rho in states {
        let next = channel::apply_step_channel(rho, inst)?;
        let (s0, s20, h0) = observables::spin_energy(inst, rho)?;
        let (s1, s21, _) = observables::spin_energy(inst, &next)?;
        ds = ds.max((s1 - s0).abs());
        ds2 = ds2.max((s21 - s20 - 2.0 * h0 / l).abs());
    }
    Ok((ds, ds2))
}

/// (2/L) Σ_{t<T} tr[Hρ_t] from the maximally mixed state.
pub fn energy_sum(inst: &Instance, steps: usize) -> Result<f64> {
    let rho0 = DensityMatrix::maximally_mixed(inst.n());
    Ok(channel::evolve(&rho0, inst, steps, &SnapshotSchedule::none())?.cumulative_energy())
}

/// Largest |ensemble mean − exact value| / (5 SE + 1/M) over H, Ŝ, Ŝ² and
/// every step. Values ≤ 1 pass.
pub fn oracle_ratio(
    inst: &Instance,
    steps: usize,
    trajectories: usize,
    seed: u64,
    workers: usize,
) -> Result<f64> {
    let h = observables::build_hamiltonian(inst);
    let (s, s2) = observables::spin_operators_for(inst);
    let stats =
        trajectory::run_ensemble_with(inst, steps, trajectories, seed, workers, &[h, s, s2])?;
    let series = channel::evolve(
        &DensityMatrix::maximally_mixed(inst.n()),
        inst,
        steps,
        &SnapshotSchedule::none(),
    )?;
    let slack = 1.0 / trajectories as f64;
    let mut worst = 0.0f64;
    for row in &series.rows {
        let exact = [row.tr_h, row.tr_s, row.tr_s2];
        for (k, want) in exact.iter().enumerate() {
            let got = stats.observable_means[k][row.t];
            let se = stats.observable_stderr[k][row.t];
            worst = worst.max((got - want).abs() / (5.0 * se + slack));
        }
    }
    Ok(worst)
}

/// Runs one suite over the given instances. Instances outside a suite's
/// scope are skipped (the spin checks need a restricted planted instance, the
/// energy bound a planted one).
pub fn run_suite(suite: Suite, instances: &[Instance], cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (k, inst) in instances.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(k as u64);
        match suite {
            Suite::Lemma1 => {
                if !is_restricted(inst) {
                    continue;
                }
                let states = random_states(inst.n(), cfg.states, seed);
                let (ds, ds2) = lemma1_residual(inst, &states)?;
                out.push(check(
                    suite,
                    k,
                    "spin conservation",
                    ds <= cfg.tolerance,
                    format!("max |dS| = {ds:.3e}"),
                ));
                out.push(check(
                    suite,
                    k,
                    "spin-squared increment",
                    ds2 <= cfg.tolerance,
                    format!("max residual = {ds2:.3e}"),
                ));
            }
            Suite::Dual => {
                let states = random_states(inst.n(), cfg.states, seed);
                let report = channel::dual_residuals(inst, &states)?;
                let r = report.max_exact_residual();
                out.push(check(
                    suite,
                    k,
                    "dual maps",
                    r <= cfg.tolerance,
                    format!("max residual = {r:.3e}"),
                ));
            }
            Suite::Oracle => {
                if inst.n() > 4 {
                    continue;
                }
                let r = oracle_ratio(
                    inst,
                    cfg.oracle_steps,
                    cfg.oracle_trajectories,
                    seed,
                    cfg.workers,
                )?;
                out.push(check(
                    suite,
                    k,
                    "trajectory average",
                    r <= 1.0,
                    format!("worst deviation = {r:.3} of allowance"),
                ));
            }
            Suite::Appendix => {
                if !is_planted(inst) {
                    continue;
                }
                let bound = 5.0 * (inst.n() * inst.n()) as f64;
                let sum = energy_sum(inst, cfg.energy_steps)?;
                out.push(check(
                    suite,
                    k,
                    "cumulative energy bound",
                    sum <= bound,
                    format!("{sum:.4} <= {bound}"),
                ));
            }
        }
    }
    Ok(out)
}
