use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use q2sat::channel::{self, SnapshotSchedule};
use q2sat::classical;
use q2sat::decision::{self, Decision, Variant};
use q2sat::densesim::DensityMatrix;
use q2sat::instance::{self, Instance, NoInstanceStyle, Provenance};
use q2sat::observables;
use q2sat::suite::{self, Suite, SuiteConfig};
use q2sat::trajectory;
use q2sat::VERSION;

use crate::{
    Kind, SuiteArg, EXIT_CAPACITY, EXIT_NO, EXIT_USAGE, EXIT_VERIFY, MAX_DENSE_QUBITS,
    MAX_SAMPLE_QUBITS,
};

pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub type Outcome = Result<u8, Failure>;

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn core(e: q2sat::Error) -> Failure {
    let code = match e {
        q2sat::Error::NumericalDrift { .. } => EXIT_VERIFY,
        _ => EXIT_USAGE,
    };
    fail(code, e.to_string())
}

const FIXTURES: &[(&str, &str)] = &[
    ("singlet.json", include_str!("../fixtures/singlet.json")),
    (
        "restricted_n4.json",
        include_str!("../fixtures/restricted_n4.json"),
    ),
    (
        "extended_n3.json",
        include_str!("../fixtures/extended_n3.json"),
    ),
    (
        "complete_pair.json",
        include_str!("../fixtures/complete_pair.json"),
    ),
];

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    instance::deserialize(&read(path)?)
        .map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn check_capacity(inst: &Instance, limit: usize) -> Result<(), Failure> {
    if inst.n() > limit {
        return Err(fail(
            EXIT_CAPACITY,
            format!(
                "n = {} exceeds the limit of {limit} qubits for this command",
                inst.n()
            ),
        ));
    }
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => {
            fs::write(p, text).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_meta(
    out: &Path,
    command: &str,
    seed: Option<u64>,
    parameters: serde_json::Value,
) -> Result<(), Failure> {
    let meta = json!({
        "tool_version": VERSION,
        "command": command,
        "seed": seed,
        "parameters": parameters,
    });
    let path = meta_path(out);
    fs::write(&path, serde_json::to_string_pretty(&meta).expect("json"))
        .map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn census_line(inst: &Instance) -> String {
    inst.census()
        .iter()
        .map(|(f, k)| format!("{f}={k}"))
        .collect::<Vec<_>>()
        .join(" ")
}

#[allow(clippy::too_many_arguments)]
pub fn generate(
    kind: Kind,
    n: usize,
    l: Option<usize>,
    type_ii_fraction: f64,
    c_target: f64,
    conjugate: bool,
    seed: u64,
    out: Option<PathBuf>,
) -> Outcome {
    let need_l = || l.ok_or_else(|| fail(EXIT_USAGE, "-L is required for this kind"));
    let mut inst = match kind {
        Kind::Restricted => instance::generate_planted_restricted(n, need_l()?, seed),
        Kind::Extended => instance::generate_planted_extended(n, need_l()?, type_ii_fraction, seed),
        Kind::NoCompletePair => {
            instance::generate_no_instance(n, NoInstanceStyle::CompletePair, seed)
        }
        Kind::NoRandom => instance::generate_no_instance(
            n,
            NoInstanceStyle::RandomCertified {
                c_target,
                clauses: l,
            },
            seed,
        ),
    }
    .map_err(core)?;
    if conjugate {
        let basis = instance::random_product_basis(n, seed.wrapping_add(1));
        inst = instance::conjugate_instance(&inst, &basis).map_err(core)?;
    }
    let parameters = format!(
        "kind={kind:?} n={n} L={} type_ii_fraction={type_ii_fraction} c_target={c_target} conjugate={conjugate}",
        inst.num_clauses()
    );
    let inst = inst.with_provenance(Provenance {
        tool_version: VERSION.to_string(),
        seed: Some(seed),
        parameters,
    });
    let text = instance::serialize(&inst) + "\n";
    emit(out.as_deref(), &text)?;
    let census = census_line(&inst);
    if out.is_some() {
        println!("{census}");
    } else {
        eprintln!("{census}");
    }
    Ok(0)
}

pub fn evolve(path: &Path, steps: usize, out: Option<PathBuf>) -> Outcome {
    let inst = load_instance(path)?;
    check_capacity(&inst, MAX_DENSE_QUBITS)?;
    let rho0 = DensityMatrix::maximally_mixed(inst.n());
    let series = channel::evolve(&rho0, &inst, steps, &SnapshotSchedule::none()).map_err(core)?;
    let csv = series.to_csv();
    emit(out.as_deref(), &csv)?;
    if let Some(p) = out.as_deref() {
        write_meta(
            p,
            "evolve",
            None,
            json!({ "instance": path.display().to_string(), "T": steps }),
        )?;
        println!(
            "{}",
            channel::format_row(series.rows.last().expect("row for t = 0"))
        );
    }
    Ok(0)
}

pub fn sample(
    path: &Path,
    steps: usize,
    m: usize,
    seed: u64,
    workers: usize,
    out: Option<PathBuf>,
) -> Outcome {
    let inst = load_instance(path)?;
    check_capacity(&inst, MAX_SAMPLE_QUBITS)?;
    let stats = trajectory::run_ensemble(&inst, steps, m, seed, workers).map_err(core)?;
    let summary = stats.summary_json();
    match out.as_deref() {
        Some(p) => {
            emit(Some(p), &stats.to_csv())?;
            write_meta(
                p,
                "sample",
                Some(seed),
                json!({
                    "instance": path.display().to_string(),
                    "T": steps,
                    "M": m,
                    "summary": summary,
                }),
            )?;
            println!("{}", serde_json::to_string(&summary).expect("json"));
        }
        None => {
            print!("{}", stats.to_csv());
            eprintln!("{}", serde_json::to_string(&summary).expect("json"));
        }
    }
    Ok(0)
}

pub fn decide(path: &Path, variant: Variant, seed: u64, out: Option<PathBuf>) -> Outcome {
    let inst = load_instance(path)?;
    check_capacity(&inst, MAX_SAMPLE_QUBITS)?;
    let verdict = decision::decide_promised(&inst, variant, seed).map_err(core)?;
    let mut js = verdict.to_json();
    js["tool_version"] = json!(VERSION);
    js["parameters"] = json!({
        "instance": path.display().to_string(),
        "c": verdict.params.c,
        "N": verdict.params.threshold,
    });
    let text = serde_json::to_string_pretty(&js).expect("json") + "\n";
    emit(out.as_deref(), &text)?;
    if out.is_some() {
        println!("{}", serde_json::to_string(&js["decision"]).expect("json"));
    }
    Ok(match verdict.decision {
        Decision::Yes => 0,
        Decision::No => EXIT_NO,
    })
}

pub fn classical(path: &Path, b: f64, seed: u64) -> Outcome {
    let inst = classical::parse_dimacs(&read(path)?).map_err(core)?;
    match classical::papadimitriou(&inst, b, seed).map_err(core)? {
        Some(x) => {
            println!("{}", classical::format_assignment(&x));
            Ok(0)
        }
        None => {
            println!("{}", classical::NOT_FOUND);
            Ok(EXIT_NO)
        }
    }
}

pub fn spectrum(path: &Path, p: f64, variant: Variant) -> Outcome {
    let inst = load_instance(path)?;
    check_capacity(&inst, MAX_DENSE_QUBITS)?;
    let h = observables::build_hamiltonian(&inst);
    let js = match observables::spectral_data(&h, observables::ZERO_TOL) {
        Ok(s) => {
            let steps = if s.ground_degeneracy > 0 {
                decision::convergence_steps(inst.n(), inst.num_clauses(), s.epsilon, p, variant)
                    .map(Some)
                    .map_err(core)?
            } else {
                None
            };
            json!({
                "n": inst.n(),
                "L": inst.num_clauses(),
                "eigenvalues": s.eigenvalues,
                "min_eigenvalue": s.min_eigenvalue,
                "epsilon": s.epsilon,
                "ground_degeneracy": s.ground_degeneracy,
                "p": p,
                "variant": variant,
                "convergence_steps": steps,
            })
        }
        Err(q2sat::Error::DegenerateSpectrum) => json!({
            "n": inst.n(),
            "L": inst.num_clauses(),
            "eigenvalues": h.eig().values,
            "epsilon": null,
        }),
        Err(e) => return Err(core(e)),
    };
    println!("{}", serde_json::to_string_pretty(&js).expect("json"));
    Ok(0)
}

fn invariant_of(err: &q2sat::Error) -> &'static str {
    let text = err.to_string();
    if text.contains("normalization") {
        "normalization"
    } else if text.contains("qubit pair") {
        "qubit pair"
    } else if text.contains("unitary") {
        "planted basis unitarity"
    } else if text.contains("planted") {
        "planted state"
    } else {
        "instance schema"
    }
}

pub fn verify(paths: &[PathBuf], suites: &[SuiteArg], seed: u64, workers: usize) -> Outcome {
    let mut named: Vec<(String, String)> = Vec::new();
    if paths.is_empty() {
        for (name, text) in FIXTURES {
            named.push((name.to_string(), text.to_string()));
        }
    } else {
        for p in paths {
            named.push((p.display().to_string(), read(p)?));
        }
    }
    let mut instances = Vec::new();
    for (name, text) in &named {
        match instance::deserialize(text) {
            Ok(inst) => instances.push(inst),
            Err(e) => {
                return Err(fail(
                    EXIT_VERIFY,
                    format!("invariant '{}' failed for {name}: {e}", invariant_of(&e)),
                ))
            }
        }
    }
    for (name, inst) in named.iter().zip(&instances) {
        if inst.n() > MAX_DENSE_QUBITS {
            return Err(fail(
                EXIT_CAPACITY,
                format!("{}: n = {} too large", name.0, inst.n()),
            ));
        }
    }
    let selected: Vec<Suite> = if suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        suites
            .iter()
            .map(|s| match s {
                SuiteArg::Lemma1 => Suite::Lemma1,
                SuiteArg::Dual => Suite::Dual,
                SuiteArg::Oracle => Suite::Oracle,
                SuiteArg::Appendix => Suite::Appendix,
            })
            .collect()
    };
    let cfg = SuiteConfig {
        seed,
        workers,
        ..SuiteConfig::default()
    };
    let mut failed: Option<String> = None;
    for s in selected {
        for c in suite::run_suite(s, &instances, &cfg).map_err(core)? {
            let status = if c.passed { "ok" } else { "FAIL" };
            println!(
                "{status} {}/{} {}: {}",
                s.name(),
                c.invariant,
                named[c.instance].0,
                c.detail
            );
            if !c.passed && failed.is_none() {
                failed = Some(format!("{}/{}", s.name(), c.invariant));
            }
        }
    }
    match failed {
        Some(name) => Err(fail(EXIT_VERIFY, format!("invariant '{name}' failed"))),
        None => Ok(0),
    }
}

pub fn report(path: &Path) -> Outcome {
    let inst = load_instance(path)?;
    println!("instance     {}", path.display());
    println!("qubits       {}", inst.n());
    println!("clauses      {}", inst.num_clauses());
    println!("forms        {}", census_line(&inst));
    println!(
        "planted      {}",
        if inst.planted_basis().is_some() {
            "yes"
        } else {
            "no"
        }
    );
    match inst.promise() {
        Some(p) => println!("promise      {:?} c = {}", p.kind, p.c),
        None => println!("promise      none"),
    }
    if let Some(pr) = inst.provenance() {
        let seed = pr
            .seed
            .map_or_else(|| "none".to_string(), |s| s.to_string());
        println!(
            "provenance   {} seed={seed} {}",
            pr.tool_version, pr.parameters
        );
    }
    if inst.n() <= MAX_DENSE_QUBITS {
        let h = observables::build_hamiltonian(&inst);
        match observables::spectral_data(&h, observables::ZERO_TOL) {
            Ok(s) => println!(
                "spectrum     min {:.6e}, gap {:.6e}, ground degeneracy {}",
                s.min_eigenvalue, s.epsilon, s.ground_degeneracy
            ),
            Err(_) => println!("spectrum     H = 0"),
        }
    }
    if let Some(p) = inst.promise() {
        for v in [Variant::Restricted, Variant::Extended] {
            let d =
                decision::decision_params(p.c, inst.num_clauses(), inst.n(), v).map_err(core)?;
            println!(
                "{:<12} f = {}, T = {}, N = {:.4}, N_int = {}{}",
                v.to_string(),
                d.f,
                d.t,
                d.threshold,
                d.n_int,
                if d.vacuous { " (vacuous)" } else { "" }
            );
        }
    }
    Ok(0)
}
