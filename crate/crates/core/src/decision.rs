//! Decision parameters and the accept/reject procedure.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{self, SnapshotSchedule};
use crate::densesim::DensityMatrix;
use crate::instance::Instance;
use crate::trajectory;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// All clauses of the form (0, a, b, 0) in the hidden frame.
    Restricted,
    /// Clauses may also be |11⟩ in the hidden frame.
    Extended,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Restricted => "restricted",
            Variant::Extended => "extended",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "restricted" => Ok(Variant::Restricted),
            "extended" => Ok(Variant::Extended),
            other => Err(Error::InvalidArgument(format!("unknown variant '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecisionParams {
    pub variant: Variant,
    pub c: f64,
    pub l: usize,
    pub n: usize,
    pub f: f64,
    /// Number of measurement steps.
    pub t: u64,
    /// Real-valued threshold, computed with the integer T.
    pub threshold: f64,
    /// Acceptance threshold: accept iff N0 ≥ n_int.
    pub n_int: u64,
    /// ((fL − 1)/(fL))².
    pub p_worst: f64,
    /// 1 − c/L, floored at 0.
    pub q_worst: f64,
    /// True when the real threshold is not positive, so every run accepts.
    pub vacuous: bool,
}

impl DecisionParams {
    /// T·p_worst·(fL − 1)/(fL) − N − (fLn or 2fLn). Zero up to rounding,
    /// since N is defined from the same product.
    pub fn hoeffding_slack(&self) -> f64 {
        let fl = self.f * self.l as f64;
        let margin = match self.variant {
            Variant::Restricted => fl * self.n as f64,
            Variant::Extended => 2.0 * fl * self.n as f64,
        };
        self.t as f64 * self.p_worst * (fl - 1.0) / fl - self.threshold - margin
    }
}

// Ceiling that does not bump values within rounding error of an integer.
pub(crate) fn ceil_guarded(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-12 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

pub fn decision_params(c: f64, l: usize, n: usize, variant: Variant) -> Result<DecisionParams> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidPromise(c));
    }
    if l < 1 {
        return Err(Error::InvalidArgument("L must be at least 1".into()));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("n must be at least 2".into()));
    }
    let (lf, nf) = (l as f64, n as f64);
    let (f, t_real, margin) = match variant {
        Variant::Restricted => {
            let f = (7.0 / c).max(1.0);
            (f, f * f * lf * lf * nf * nf / 2.0, f * lf * nf)
        }
        Variant::Extended => {
            let f = (22.0 / (5.0 * c)).max(1.0);
            (f, 5.0 * f * f * lf * lf * nf * nf / 2.0, 2.0 * f * lf * nf)
        }
    };
    let t = ceil_guarded(t_real);
    let r = (f * lf - 1.0) / (f * lf);
    let threshold = t * r.powi(3) - margin;
    let vacuous = threshold <= 0.0;
    if vacuous {
        log::warn!(
            "threshold N = {threshold} is not positive for c={c}, L={l}, n={n}; every run accepts"
        );
    }
    Ok(DecisionParams {
        variant,
        c,
        l,
        n,
        f,
        t: t as u64,
        threshold,
        n_int: if vacuous {
            0
        } else {
            ceil_guarded(threshold) as u64
        },
        p_worst: r * r,
        q_worst: (1.0 - c / lf).max(0.0),
        vacuous,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    #[serde(rename = "YES")]
    Yes,
    #[serde(rename = "NO")]
    No,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub decision: Decision,
    pub n0: u64,
    pub params: DecisionParams,
    pub seed: u64,
}

impl Verdict {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "decision": self.decision,
            "N0": self.n0,
            "T": self.params.t,
            "N_int": self.params.n_int,
            "f": self.params.f,
            "variant": self.params.variant,
            "seed": self.seed,
        })
    }
}

/// Runs one trajectory of params.t steps and accepts iff N0 ≥ params.n_int.
pub fn decide(inst: &Instance, params: &DecisionParams, seed: u64) -> Result<Verdict> {
    if params.l != inst.num_clauses() || params.n != inst.n() {
        return Err(Error::InvalidArgument(format!(
            "parameters computed for n={}, L={} but instance has n={}, L={}",
            params.n,
            params.l,
            inst.n(),
            inst.num_clauses()
        )));
    }
    let steps = usize::try_from(params.t)
        .map_err(|_| Error::InvalidArgument(format!("T = {} too large", params.t)))?;
    let rec = trajectory::run_trajectory(inst, steps, seed, false)?;
    let n0 = rec.n0 as u64;
    Ok(Verdict {
        decision: if n0 >= params.n_int {
            Decision::Yes
        } else {
            Decision::No
        },
        n0,
        params: *params,
        seed,
    })
}

/// Parameters from the instance's own promise, then [`decide`].
pub fn decide_promised(inst: &Instance, variant: Variant, seed: u64) -> Result<Verdict> {
    let promise = inst.promise().ok_or(Error::MissingPromise)?;
    let params = decision_params(promise.c, inst.num_clauses(), inst.n(), variant)?;
    decide(inst, &params, seed)
}

/// Independent decisions with seeds `first_seed + k`, k < runs.
pub fn decide_many(
    inst: &Instance,
    params: &DecisionParams,
    first_seed: u64,
    runs: usize,
    workers: usize,
) -> Result<Vec<Verdict>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..runs)
            .into_par_iter()
            .map(|k| decide(inst, params, first_seed.wrapping_add(k as u64)))
            .collect()
    })
}

/// Steps after which the ground-space weight exceeds p, given spectral gap ε.
pub fn convergence_steps(
    n: usize,
    l: usize,
    epsilon: f64,
    p: f64,
    variant: Variant,
) -> Result<u64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidTarget(p));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let base = (n * n * l) as f64 / (2.0 * (1.0 - p) * epsilon);
    let scaled = match variant {
        Variant::Restricted => base,
        Variant::Extended => 5.0 * base,
    };
    Ok(ceil_guarded(scaled) as u64)
}

/// Σ_{t<T} (1 − tr[Hρ_t]/L) from the maximally mixed state.
pub fn expected_zero_count(inst: &Instance, steps: usize) -> Result<f64> {
    let rho0 = DensityMatrix::maximally_mixed(inst.n());
    Ok(channel::evolve(&rho0, inst, steps, &SnapshotSchedule::none())?.expected_zero_count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{self, make_clause, NoInstanceStyle, Promise};
    use crate::C64;
    use proptest::prelude::*;

    #[test]
    fn restricted_example() {
        let p = decision_params(1.0, 4, 2, Variant::Restricted).unwrap();
        assert_eq!(p.f, 7.0);
        assert_eq!(p.t, 1568);
        let want = 19683.0 / 14.0 - 56.0;
        assert!((p.threshold - want).abs() < 1e-9);
        assert_eq!(p.n_int, 1350);
        assert!(!p.vacuous);
        assert!((p.p_worst - (27.0f64 / 28.0).powi(2)).abs() < 1e-15);
        assert_eq!(p.q_worst, 0.75);
    }

    #[test]
    fn vacuous_example() {
        let p = decision_params(8.0, 2, 2, Variant::Restricted).unwrap();
        assert_eq!(p.f, 1.0);
        assert_eq!(p.t, 8);
        assert!((p.threshold + 3.0).abs() < 1e-12);
        assert_eq!(p.n_int, 0);
        assert!(p.vacuous);
    }

    #[test]
    fn extended_example() {
        let p = decision_params(1.0, 2, 2, Variant::Extended).unwrap();
        assert!((p.f - 4.4).abs() < 1e-15);
        // 5 · 4.4² · 4 · 4 / 2 = 774.4
        assert_eq!(p.t, 775);
        let fl: f64 = 8.8;
        let want = 775.0 * ((fl - 1.0) / fl).powi(3) - 2.0 * fl * 2.0;
        assert!((p.threshold - want).abs() < 1e-9);
        assert_eq!(p.n_int, want.ceil() as u64);
    }

    #[test]
    fn invalid_promise() {
        assert_eq!(
            decision_params(0.0, 2, 2, Variant::Restricted),
            Err(Error::InvalidPromise(0.0))
        );
        assert!(decision_params(-1.0, 2, 2, Variant::Extended).is_err());
        assert!(decision_params(1.0, 0, 2, Variant::Extended).is_err());
        assert!(decision_params(1.0, 2, 1, Variant::Extended).is_err());
    }

    #[test]
    fn guarded_ceiling() {
        assert_eq!(ceil_guarded(20.000000000000004), 20.0);
        assert_eq!(ceil_guarded(774.4), 775.0);
        assert_eq!(ceil_guarded(-3.0), -3.0);
        assert_eq!(ceil_guarded(1349.93), 1350.0);
    }

    #[test]
    fn convergence_examples() {
        assert_eq!(
            convergence_steps(2, 1, 1.0, 0.9, Variant::Restricted),
            Ok(20)
        );
        assert_eq!(
            convergence_steps(2, 1, 1.0, 0.9, Variant::Extended),
            Ok(100)
        );
        assert_eq!(
            convergence_steps(2, 1, 1.0, 1.0, Variant::Restricted),
            Err(Error::InvalidTarget(1.0))
        );
        assert!(convergence_steps(2, 1, 1.0, 0.0, Variant::Restricted).is_err());
        assert!(convergence_steps(2, 1, 0.0, 0.5, Variant::Restricted).is_err());
    }

    fn singlet_instance() -> Instance {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let c = make_clause(0, 1, [z, C64::new(s, 0.0), C64::new(-s, 0.0), z]).unwrap();
        Instance::new(2, vec![c], None, None).unwrap()
    }

    #[test]
    fn expected_zero_count_examples() {
        let v = expected_zero_count(&singlet_instance(), 3).unwrap();
        assert!((v - 171.0 / 64.0).abs() < 1e-14);
        let no = instance::generate_no_instance(2, NoInstanceStyle::CompletePair, 1).unwrap();
        let v = expected_zero_count(&no, 40).unwrap();
        assert!((v - 30.0).abs() < 1e-12);
        let yes = instance::generate_planted_restricted(3, 3, 2).unwrap();
        assert!(expected_zero_count(&yes, 20).unwrap() < 20.0);
        assert_eq!(expected_zero_count(&yes, 0).unwrap(), 0.0);
    }

    #[test]
    fn zero_step_decision() {
        let inst = singlet_instance();
        let mut p = decision_params(8.0, 1, 2, Variant::Restricted).unwrap();
        p.t = 0;
        p.n_int = 0;
        let v = decide(&inst, &p, 1).unwrap();
        assert_eq!((v.n0, v.decision), (0, Decision::Yes));
        p.n_int = 1;
        assert_eq!(decide(&inst, &p, 1).unwrap().decision, Decision::No);
    }

    #[test]
    fn decide_is_deterministic_and_checks_shape() {
        let inst = instance::generate_planted_restricted(2, 4, 3).unwrap();
        let p = decision_params(1.0, 4, 2, Variant::Restricted).unwrap();
        assert_eq!(decide(&inst, &p, 5).unwrap(), decide(&inst, &p, 5).unwrap());
        let wrong = decision_params(1.0, 3, 2, Variant::Restricted).unwrap();
        assert!(decide(&inst, &wrong, 5).is_err());
    }

    #[test]
    fn missing_promise() {
        assert_eq!(
            decide_promised(&singlet_instance(), Variant::Restricted, 1),
            Err(Error::MissingPromise)
        );
        let inst = singlet_instance().with_promise(Promise::yes(8.0).unwrap());
        assert!(decide_promised(&inst, Variant::Restricted, 1).is_ok());
    }

    #[test]
    fn verdict_json_fields() {
        let inst = instance::generate_planted_restricted(2, 2, 4).unwrap();
        let p = decision_params(8.0, 2, 2, Variant::Restricted).unwrap();
        let js = decide(&inst, &p, 9).unwrap().to_json();
        for key in ["decision", "N0", "T", "N_int", "f", "variant", "seed"] {
            assert!(js.get(key).is_some(), "{key}");
        }
        assert_eq!(js["decision"], "YES");
        assert_eq!(js["variant"], "restricted");
    }

    #[test]
    fn decide_many_is_schedule_free() {
        let inst = instance::generate_planted_restricted(2, 2, 4).unwrap();
        let p = decision_params(7.0, 2, 2, Variant::Restricted).unwrap();
        let a = decide_many(&inst, &p, 100, 10, 1).unwrap();
        let b = decide_many(&inst, &p, 100, 10, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[3], decide(&inst, &p, 103).unwrap());
    }

    proptest! {
        #[test]
        fn smaller_gap_needs_more_steps(c in 0.01f64..10.0, shrink in 0.1f64..1.0, l in 1usize..8, n in 2usize..8) {
            for v in [Variant::Restricted, Variant::Extended] {
                let a = decision_params(c, l, n, v).unwrap();
                let b = decision_params(c * shrink, l, n, v).unwrap();
                prop_assert!(b.f >= a.f);
                prop_assert!(b.t >= a.t);
                prop_assert!((0.0..=1.0).contains(&a.p_worst));
                if !a.vacuous {
                    prop_assert!(a.hoeffding_slack().abs() <= 1e-9 * a.t as f64);
                    prop_assert!(a.n_int as f64 >= a.threshold * (1.0 - 1e-12));
                }
            }
        }
    }
}
