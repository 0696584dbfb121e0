use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use mpm_core::audit::{audit_formulas, CanonicalForms, FormulaSet};
use mpm_core::dynamics::{integrate, integrate_ep, Lagrangian, TrajectoryRecord};
use mpm_core::sl2c::{self, derive_actions, iwasawa_factor, Mat2C, Sl2cPrintedForms};
use mpm_core::{
    tolerance, AlgebraVector, DualPoint, MatchedPair, MatrixBasisDocument, TensorDocument,
};
use serde_json::json;

use crate::config::{
    self, check_initial, load_hamiltonian, load_invariants, load_pair, Mode, Resolved,
};

struct Row {
    name: &'static str,
    value: Option<f64>,
    limit: f64,
}

impl Row {
    fn passes(&self) -> bool {
        self.value.is_some_and(|v| v <= self.limit)
    }
}

fn print_rows(rows: &[Row]) {
    for r in rows {
        match r.value {
            Some(v) => println!(
                "{:<16} {:>11.3e}  limit {:.1e}  {}",
                r.name,
                v,
                r.limit,
                if r.passes() { "ok" } else { "FAIL" }
            ),
            None => println!("{:<16} {:>11}  limit {:.1e}  skipped", r.name, "-", r.limit),
        }
    }
}

/// Exit 0 when every check passes, 1 otherwise.
pub fn check(source: &str) -> Result<u8> {
    let (pair, raw) = match sl2c::builtin(source) {
        Some(p) => (p, [0.0, 0.0]),
        None => {
            let path = Path::new(source);
            if !path.exists() {
                bail!(
                    "unknown pair {source:?}: not a built-in ({}) and no such file",
                    sl2c::BUILTIN_PAIRS.join(", ")
                );
            }
            let doc = config::load_document(path)?;
            let mut rows = Vec::new();
            for (name, alg) in [("antisymmetry(g)", &doc.g), ("antisymmetry(h)", &doc.h)] {
                let flat: Vec<f64> = alg.constants.iter().flatten().flatten().copied().collect();
                rows.push(Row {
                    name,
                    value: Some(alg.antisymmetry_defect()),
                    limit: tolerance::ANTISYMMETRY_REL
                        * tolerance::scale_of(&flat)
                        * tolerance::factor(),
                });
            }
            if rows.iter().any(|r| !r.passes()) {
                println!("pair: {source}");
                print_rows(&rows);
                println!("status: FAIL");
                return Ok(1);
            }
            (
                doc.to_pair()?,
                [doc.g.antisymmetry_defect(), doc.h.antisymmetry_defect()],
            )
        }
    };
    check_pair(source, &pair, raw)
}

/// `raw` holds the antisymmetry defects of the input before it was
/// antisymmetrized.
fn check_pair(source: &str, pair: &MatchedPair, raw: [f64; 2]) -> Result<u8> {
    println!(
        "pair: {source} (dim g = {}, dim h = {})",
        pair.n(),
        pair.m()
    );
    let compat = pair.compat_defect();
    let (jac, jac_limit) = pair.double_jacobi()?;
    let rows = [
        Row {
            name: "antisymmetry(g)",
            value: Some(raw[0]),
            limit: tolerance::ANTISYMMETRY_REL
                * (1.0 + pair.g().max_abs_constant())
                * tolerance::factor(),
        },
        Row {
            name: "antisymmetry(h)",
            value: Some(raw[1]),
            limit: tolerance::ANTISYMMETRY_REL
                * (1.0 + pair.h().max_abs_constant())
                * tolerance::factor(),
        },
        Row {
            name: "jacobi(g)",
            value: Some(pair.g().jacobi_defect()),
            limit: pair.g().jacobi_tolerance(),
        },
        Row {
            name: "jacobi(h)",
            value: Some(pair.h().jacobi_defect()),
            limit: pair.h().jacobi_tolerance(),
        },
        Row {
            name: "compat(1)",
            value: Some(compat.d1),
            limit: compat.tolerance,
        },
        Row {
            name: "compat(2)",
            value: Some(compat.d2),
            limit: compat.tolerance,
        },
        Row {
            name: "jacobi(double)",
            value: Some(jac),
            limit: jac_limit,
        },
    ];
    print_rows(&rows);
    if let Some(w) = &compat.witness {
        let cond = match w.condition {
            mpm_core::matched_pair::CompatCondition::LeftOnBracket => 1,
            mpm_core::matched_pair::CompatCondition::BracketOnRight => 2,
        };
        println!(
            "witness: condition {cond} at {w}, residual {}",
            fmt_vec(&w.residual)
        );
    }
    let ok = rows.iter().all(Row::passes);
    println!("status: {}", if ok { "PASS" } else { "FAIL" });
    Ok(if ok { 0 } else { 1 })
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn simulate(cfg: Resolved) -> Result<u8> {
    let pair = load_pair(&cfg.pair)?
        .validate()
        .with_context(|| format!("pair {}", cfg.pair))?;
    let (n, m) = (pair.n(), pair.m());
    let double = pair.build_double()?;
    let hamiltonian = load_hamiltonian(&cfg.hamiltonian, n, m)?;
    let invariants = load_invariants(&cfg.invariants, &double)?;
    let initial = match &cfg.initial {
        Some(v) => {
            check_initial(v, n + m)?;
            v.clone()
        }
        None => {
            let mut rng = mpm_core::rng::seeded(cfg.seed);
            mpm_core::rng::normal_vec(&mut rng, n + m)
        }
    };

    let started = Instant::now();
    let record = match cfg.mode {
        Mode::Lp => {
            let p0 = DualPoint::from_flat(&initial, n);
            integrate(
                &double,
                &hamiltonian,
                &p0,
                cfg.dt,
                cfg.t_end,
                cfg.convention,
                &invariants,
            )?
        }
        Mode::Ep => {
            let lagrangian = Lagrangian::from_hamiltonian(&hamiltonian, n, m)?;
            let xi = AlgebraVector(initial[..n].to_vec());
            let eta = AlgebraVector(initial[n..].to_vec());
            integrate_ep(
                &pair,
                &lagrangian,
                &xi,
                &eta,
                cfg.dt,
                cfg.t_end,
                &invariants,
            )?
        }
    };
    let wall = started.elapsed().as_secs_f64();

    let csv_path = format!("{}.csv", cfg.out);
    let summary_path = format!("{}.summary.json", cfg.out);
    write_csv(&record, Path::new(&csv_path))?;

    let drift: serde_json::Map<String, serde_json::Value> = record
        .drift_summary()
        .into_iter()
        .map(|(k, v)| (k, json!(v)))
        .collect();
    let last = record.final_state();
    let summary = json!({
        "pair": cfg.pair,
        "hamiltonian": cfg.hamiltonian,
        "mode": cfg.mode.as_str(),
        "convention": match cfg.mode {
            Mode::Lp => cfg.convention.to_string(),
            Mode::Ep => "euler-poincare".to_string(),
        },
        "dt": cfg.dt,
        "t_end": cfg.t_end,
        "steps": record.steps(),
        "seed": cfg.seed,
        "initial": initial,
        "final_time": record.final_time(),
        "final_state": {"mu": last.mu.0, "nu": last.nu.0},
        "drift": drift,
        "wall_time_s": wall,
    });
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(&summary_path, text).with_context(|| format!("writing {summary_path}"))?;

    println!(
        "wrote {csv_path} and {summary_path} ({} steps)",
        record.steps()
    );
    for (name, d) in record.drift_summary() {
        println!("drift {name}: {d:.3e}");
    }
    Ok(0)
}

fn write_csv(record: &TrajectoryRecord, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    record
        .write_csv(&mut w)
        .and_then(|_| w.flush())
        .with_context(|| format!("writing {}", path.display()))
}

pub fn audit(
    source: &str,
    printed: bool,
    samples: usize,
    seed: u64,
    as_json: bool,
    out: Option<&str>,
) -> Result<u8> {
    let reference = load_pair(source)?;
    let canonical;
    let candidate: &dyn FormulaSet = if printed {
        if (reference.n(), reference.m()) != (3, 3) {
            bail!("printed forms need a 3 + 3 dimensional reference pair");
        }
        &Sl2cPrintedForms
    } else {
        canonical = CanonicalForms::new(&reference, source)?;
        &canonical
    };
    let mut report = audit_formulas(&reference, candidate, samples, seed)?;
    report.reference = match source {
        "sl2c" => "sl2c_derived".to_string(),
        other => other.to_string(),
    };
    let text = report.render_text();
    let mut json_text = serde_json::to_string_pretty(&report.to_json())?;
    json_text.push('\n');
    if as_json {
        print!("{json_text}");
    } else {
        print!("{text}");
    }
    if let Some(prefix) = out {
        fs::write(format!("{prefix}.txt"), &text)
            .with_context(|| format!("writing {prefix}.txt"))?;
        fs::write(format!("{prefix}.json"), &json_text)
            .with_context(|| format!("writing {prefix}.json"))?;
    }
    Ok(0)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn derive(basis: &Path, out: Option<&Path>) -> Result<u8> {
    let text = config::read_to_string(basis)?;
    let doc = MatrixBasisDocument::from_json(&text)
        .with_context(|| format!("parsing matrix basis {}", basis.display()))?;
    let pair = derive_actions(&doc.to_basis())?;
    let mut json_text = TensorDocument::from_pair(&pair).to_json_pretty();
    json_text.push('\n');
    emit(&json_text, out)?;
    Ok(0)
}

pub fn export(source: &str, out: Option<&Path>) -> Result<u8> {
    let pair = sl2c::builtin(source).ok_or_else(|| {
        anyhow!(
            "unknown built-in pair {source:?}; expected one of {}",
            sl2c::BUILTIN_PAIRS.join(", ")
        )
    })?;
    let mut json_text = TensorDocument::from_pair(&pair).to_json_pretty();
    json_text.push('\n');
    emit(&json_text, out)?;
    Ok(0)
}

fn parse_matrix(arg: &str) -> Result<Mat2C> {
    if arg == "identity" {
        return Ok(Mat2C::identity());
    }
    let path = Path::new(arg);
    if path.exists() {
        let text = config::read_to_string(path)?;
        let pairs: [[[f64; 2]; 2]; 2] = serde_json::from_str(&text)
            .with_context(|| format!("parsing matrix {}", path.display()))?;
        return Ok(Mat2C::from_pairs(pairs));
    }
    let v = config::parse_numbers(arg).map_err(|e| anyhow!("matrix: {e}"))?;
    if v.len() != 8 {
        bail!(
            "matrix needs 8 numbers (re, im for each entry, row-major), got {}",
            v.len()
        );
    }
    Ok(Mat2C::from_pairs([
        [[v[0], v[1]], [v[2], v[3]]],
        [[v[4], v[5]], [v[6], v[7]]],
    ]))
}

pub fn factor(arg: &str) -> Result<u8> {
    let m = parse_matrix(arg)?;
    let (a, b) = iwasawa_factor(&m)?;
    let residual = a.matrix().mul(&b.to_matrix()).max_abs_diff(&m);
    println!("A = {}", a.matrix());
    println!("(a, b, c) = ({:.12}, {:.12}, {:.12})", b.a, b.b, b.c);
    println!("residual = {residual:.3e}");
    Ok(0)
}
