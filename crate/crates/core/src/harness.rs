//! Command implementations behind the `qfa` binary.

use std::f64::consts::PI;
use std::time::Instant;

use crate::alphabet::Alphabet;
use crate::classical::{classify_word, AcceptanceMode, Decision, Gfa};
use crate::equivalence::{gfa_equiv_with_tol, qfa_to_gfa, EquivalenceVerdict, NUMERIC_RANK_TOL};
use crate::error::{Error, Result};
use crate::format::Machine;
use crate::numeric::Real;
use crate::oneway::{
    build_modp_2state, build_modp_logstate, build_neq_nqfa, default_neq_angle,
    logstate_closed_form, modp_2state_closed_form, GeneralQfa,
};
use crate::report::{Cell, ExperimentReport};
use crate::twoway::families::{
    build_eq_15kwqfa, build_eq_tqcfa, build_pal_tqcfa, eq_reject_bound, is_balanced, is_palindrome,
    pal_reject_bound, tqcfa_exact_accept, Family,
};
use crate::twoway::kwqfa::twoway_kwqfa_run;
use crate::twoway::tqcfa::{tqcfa_monte_carlo, Tqcfa};

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub tol: f64,
    pub seed: u64,
    pub trials: u64,
    /// Step cap for two-way machines; `None` uses each model's default.
    pub max_steps: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            tol: 1e-9,
            seed: 0,
            trials: 10_000,
            max_steps: None,
        }
    }
}

const TQCFA_DEFAULT_MAX_STEPS: u64 = 100_000_000;
/// Monte Carlo is skipped when one trial is expected to loop more often.
const MC_ITERATION_BUDGET: f64 = 1e4;

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    /// Mass neither accepted nor rejected (two-way, KWQFA), or the fraction
    /// of capped trials (2QCFA).
    pub residual: Option<f64>,
    pub steps: Option<f64>,
}

impl Evaluation {
    fn plain(value: f64) -> Self {
        Evaluation {
            value,
            residual: None,
            steps: None,
        }
    }
}

/// Acceptance value of `word`. 2QCFAs are sampled with `opts.trials`.
pub fn evaluate<R: Real>(m: &Machine<R>, word: &str, opts: &RunOptions) -> Result<Evaluation> {
    Ok(match m {
        Machine::Dfa(p) | Machine::Pfa(p) => Evaluation::plain(p.accept_prob(word)?.to_f64()),
        Machine::Gfa(g) => Evaluation::plain(g.value(word)?.to_f64()),
        Machine::Mcqfa(q) => Evaluation::plain(q.accept_prob(word)?.to_f64()),
        Machine::Kwqfa(q) => {
            let (a, r) = q.accept_reject(word)?;
            let (a, r) = (a.to_f64(), r.to_f64());
            Evaluation {
                value: a,
                residual: Some(1.0 - a - r),
                steps: None,
            }
        }
        Machine::Qfa(q) => Evaluation::plain(q.accept_prob(word)?.to_f64()),
        Machine::TwoWayKwqfa(t) => {
            let cap = opts
                .max_steps
                .map_or_else(|| t.default_max_steps(word.chars().count()), |s| s as usize);
            let run = twoway_kwqfa_run(t, word, cap)?;
            Evaluation {
                value: run.accept,
                residual: Some(run.residual),
                steps: Some(run.steps as f64),
            }
        }
        Machine::Tqcfa(t) => {
            let stats = tqcfa_monte_carlo(
                t,
                word,
                opts.trials,
                opts.seed,
                opts.max_steps.unwrap_or(TQCFA_DEFAULT_MAX_STEPS),
            )?;
            Evaluation {
                value: stats.accept_frequency,
                residual: Some(stats.capped as f64 / stats.trials as f64),
                steps: Some(stats.mean_steps),
            }
        }
    })
}

fn has_extra_columns<R: Real>(m: &Machine<R>) -> bool {
    matches!(
        m,
        Machine::Kwqfa(_) | Machine::TwoWayKwqfa(_) | Machine::Tqcfa(_)
    )
}

fn display_word(w: &str) -> String {
    if w.is_empty() {
        "ε".to_string()
    } else {
        w.to_string()
    }
}

/// One row per word: value and membership decision (plus residual and
/// steps for machines that have them).
pub fn cmd_run<R: Real>(
    m: &Machine<R>,
    words: &[String],
    mode: AcceptanceMode,
    opts: &RunOptions,
) -> Result<ExperimentReport> {
    mode.validate()?;
    let extra = has_extra_columns(m);
    let columns: &[&str] = if extra {
        &["word", "value", "decision", "residual", "steps"]
    } else {
        &["word", "value", "decision"]
    };
    let mut report = ExperimentReport::new(format!("run ({})", m.model()), columns);
    for w in words {
        let e = evaluate(m, w, opts)?;
        let mut row: Vec<Cell> = vec![
            display_word(w).into(),
            e.value.into(),
            classify_word(e.value, mode, opts.tol).to_string().into(),
        ];
        if extra {
            row.push(e.residual.into());
            row.push(e.steps.into());
        }
        report.push(row);
    }
    Ok(report)
}

/// Runs every word of length `≤ max_len` and lists the members.
pub fn cmd_classify<R: Real>(
    m: &Machine<R>,
    max_len: usize,
    mode: AcceptanceMode,
    opts: &RunOptions,
) -> Result<ExperimentReport> {
    let words = m.alphabet().words_up_to(max_len);
    let mut report = cmd_run(m, &words, mode, opts)?;
    report.title = format!("classify ({}, length <= {max_len})", m.model());
    let decisions = report.column("decision").expect("decision column");
    let pick = |d: Decision| {
        words
            .iter()
            .zip(&decisions)
            .filter(|(_, c)| **c == &Cell::Text(d.to_string()))
            .map(|(w, _)| display_word(w))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let (members, undetermined) = (pick(Decision::Member), pick(Decision::Undetermined));
    report.note("members", members);
    report.note("undetermined", undetermined);
    Ok(report)
}

/// Linear representation of a one-way machine.
pub fn to_gfa<R: Real>(m: &Machine<R>) -> Result<Gfa<R>> {
    match m {
        Machine::Dfa(p) | Machine::Pfa(p) => Ok(p.lift()),
        Machine::Gfa(g) => Ok(g.clone()),
        Machine::Mcqfa(q) => Ok(qfa_to_gfa(&GeneralQfa::from_mcqfa(q))),
        Machine::Qfa(q) => Ok(qfa_to_gfa(q)),
        other => Err(Error::InvalidParameter(format!(
            "equivalence checking is not available for model '{}'",
            other.model()
        ))),
    }
}

pub struct EquivOutcome<R: Real> {
    pub verdict: EquivalenceVerdict<R>,
    pub text: String,
}

pub fn cmd_equiv<R: Real>(a: &Machine<R>, b: &Machine<R>, tol: f64) -> Result<EquivOutcome<R>> {
    let verdict = gfa_equiv_with_tol(&to_gfa(a)?, &to_gfa(b)?, tol)?;
    let mut text = format!(
        "verdict: {}\nmode: {}\ndimension: {}\n",
        if verdict.equal {
            "equal"
        } else {
            "inequivalent"
        },
        verdict.mode_label(),
        verdict.dimension
    );
    if let Some(w) = &verdict.witness {
        text += &format!(
            "witness: \"{}\"\nleft: {}\nright: {}\n",
            w.word,
            w.left.render(),
            w.right.render()
        );
    }
    Ok(EquivOutcome { verdict, text })
}

/// Parameters shared by the demos; unset fields take per-demo defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DemoParams {
    pub p: Option<u64>,
    pub k: Option<u64>,
    pub eps: Option<f64>,
    pub theta: Option<f64>,
    pub words: Vec<String>,
    pub max_len: Option<usize>,
}

pub const DEMOS: [&str; 6] = [
    "modp-2state",
    "modp-log",
    "neq",
    "eq-2qcfa",
    "pal-2qcfa",
    "eq-15kwqfa",
];

pub struct Demo {
    pub report: ExperimentReport,
    pub machine: Machine<f64>,
}

fn demo_words(params: &DemoParams, default_len: usize) -> Vec<String> {
    if params.words.is_empty() {
        Alphabet::from_letters("ab").words_up_to(params.max_len.unwrap_or(default_len))
    } else {
        params.words.clone()
    }
}

fn small_k(params: &DemoParams) -> Result<u32> {
    let k = params.k.unwrap_or(2);
    u32::try_from(k).map_err(|_| Error::InvalidParameter(format!("k = {k} too large")))
}

pub fn cmd_demo(name: &str, params: &DemoParams, opts: &RunOptions) -> Result<Demo> {
    match name {
        "modp-2state" => demo_modp_2state(params, opts),
        "modp-log" => demo_modp_log(params, opts),
        "neq" => demo_neq(params, opts),
        "eq-2qcfa" => demo_tqcfa(Family::Eq, params, opts),
        "pal-2qcfa" => demo_tqcfa(Family::Pal, params, opts),
        "eq-15kwqfa" => demo_eq_15(params, opts),
        _ => Err(Error::Unknown {
            kind: "demo",
            name: name.to_string(),
        }),
    }
}

fn demo_modp_2state(params: &DemoParams, opts: &RunOptions) -> Result<Demo> {
    let (p, k) = (params.p.unwrap_or(5), params.k.unwrap_or(1));
    let m = build_modp_2state(p, k)?;
    let bound = (PI / p as f64).cos().powi(2);
    let mode = AcceptanceMode::NegativeOneSidedBounded(bound);
    let mut report = ExperimentReport::new(
        format!("MOD_{p}, two states, k = {k}"),
        &[
            "j",
            "accept",
            "closed_form",
            "member",
            "claimed",
            "decision",
        ],
    );
    for j in 0..=2 * p {
        let v = m.accept_prob(&"a".repeat(j as usize))?;
        let member = j % p == 0;
        let claimed = if member {
            "accept = 1".to_string()
        } else {
            format!("accept <= {}", crate::report::format_number(bound))
        };
        report.push(vec![
            j.into(),
            v.into(),
            modp_2state_closed_form(p, k, j).into(),
            member.into(),
            claimed.into(),
            classify_word(v, mode, opts.tol).to_string().into(),
        ]);
    }
    report.note("states", 2);
    Ok(Demo {
        report,
        machine: Machine::Mcqfa(m),
    })
}

fn demo_modp_log(params: &DemoParams, opts: &RunOptions) -> Result<Demo> {
    let (p, eps) = (params.p.unwrap_or(31), params.eps.unwrap_or(0.25));
    let built = build_modp_logstate(p, eps, opts.seed)?;
    let mode = AcceptanceMode::NegativeOneSidedBounded(eps);
    let mut report = ExperimentReport::new(
        format!("MOD_{p}, {} states, eps = {eps}", 2 * built.blocks),
        &[
            "j",
            "accept",
            "closed_form",
            "member",
            "claimed",
            "decision",
        ],
    );
    for j in 0..p {
        let v = built.machine.accept_prob(&"a".repeat(j as usize))?;
        let member = j % p == 0;
        let claimed = if member {
            "accept = 1".to_string()
        } else {
            format!("accept <= {eps}")
        };
        report.push(vec![
            j.into(),
            v.into(),
            logstate_closed_form(p, &built.multipliers, j).into(),
            member.into(),
            claimed.into(),
            classify_word(v, mode, opts.tol).to_string().into(),
        ]);
    }
    report.note("blocks", built.blocks);
    report.note("states", 2 * built.blocks);
    report.note("multipliers", format!("{:?}", built.multipliers));
    report.note("redraws", built.redraws);
    report.note("seed_used", built.seed_used);
    report.note(
        "max_nonmember_accept",
        crate::report::format_number(built.max_nonmember_accept),
    );
    Ok(Demo {
        report,
        machine: Machine::Mcqfa(built.machine),
    })
}

fn demo_neq(params: &DemoParams, opts: &RunOptions) -> Result<Demo> {
    let m = build_neq_nqfa(params.theta.unwrap_or_else(default_neq_angle))?;
    let mut report = ExperimentReport::new(
        "unequal letter counts, positive one-sided",
        &["word", "accept", "member", "claimed", "decision"],
    );
    for w in demo_words(params, 4) {
        let v = m.accept_prob(&w)?;
        let member = !is_balanced(&w)?;
        let claimed = if member { "accept > 0" } else { "accept = 0" };
        report.push(vec![
            display_word(&w).into(),
            v.into(),
            member.into(),
            claimed.into(),
            classify_word(v, AcceptanceMode::PositiveOneSided, opts.tol)
                .to_string()
                .into(),
        ]);
    }
    Ok(Demo {
        report,
        machine: Machine::Mcqfa(m),
    })
}

fn demo_tqcfa(family: Family, params: &DemoParams, opts: &RunOptions) -> Result<Demo> {
    let k = small_k(params)?;
    let (machine, bound): (Tqcfa, f64) = match family {
        Family::Eq => (build_eq_tqcfa(k)?, eq_reject_bound(k)),
        Family::Pal => (build_pal_tqcfa(k)?, pal_reject_bound(k)),
    };
    let mut report = ExperimentReport::new(
        format!("{family} 2QCFA, k = {k}"),
        &[
            "word",
            "member",
            "quantum_reject",
            "gadget_accept",
            "accept",
            "reject",
            "claimed",
            "iterations",
            "mc_accept",
            "mc_steps",
            "mc_capped",
        ],
    );
    let mut skipped = Vec::new();
    for w in demo_words(params, 3) {
        let member = match family {
            Family::Eq => is_balanced(&w)?,
            Family::Pal => is_palindrome(&w),
        };
        let exact = tqcfa_exact_accept(family, &w, k)?;
        let claimed = if member {
            "accept = 1".to_string()
        } else {
            format!("reject >= {}", crate::report::format_number(bound))
        };
        let mc = if opts.trials > 0 && exact.expected_iterations <= MC_ITERATION_BUDGET {
            Some(tqcfa_monte_carlo(
                &machine,
                &w,
                opts.trials,
                opts.seed,
                opts.max_steps.unwrap_or(TQCFA_DEFAULT_MAX_STEPS),
            )?)
        } else {
            if opts.trials > 0 {
                skipped.push(display_word(&w));
            }
            None
        };
        report.push(vec![
            display_word(&w).into(),
            member.into(),
            exact.reject_per_iteration.into(),
            exact.accept_per_iteration.into(),
            exact.accept.into(),
            exact.reject.into(),
            claimed.into(),
            exact.expected_iterations.into(),
            mc.as_ref().map(|s| s.accept_frequency).into(),
            mc.as_ref().map(|s| s.mean_steps).into(),
            mc.as_ref().map(|s| s.capped).into(),
        ]);
    }
    report.note("trials", opts.trials);
    report.note("seed", opts.seed);
    if !skipped.is_empty() {
        report.note(
            "monte_carlo_skipped",
            format!(
                "{} (more than {MC_ITERATION_BUDGET} expected iterations)",
                skipped.join(" ")
            ),
        );
    }
    Ok(Demo {
        report,
        machine: Machine::Tqcfa(machine),
    })
}

fn demo_eq_15(params: &DemoParams, opts: &RunOptions) -> Result<Demo> {
    let m = build_eq_15kwqfa();
    let mut report = ExperimentReport::new(
        "EQ, 1.5-way quantum head",
        &[
            "word", "accept", "reject", "residual", "steps", "claimed", "decision",
        ],
    );
    for w in demo_words(params, 4) {
        let cap = opts
            .max_steps
            .map_or_else(|| m.default_max_steps(w.chars().count()), |s| s as usize);
        let run = twoway_kwqfa_run(&m, &w, cap)?;
        let claimed = if is_balanced(&w)? {
            "accept = 1"
        } else {
            "accept = 1/2"
        };
        report.push(vec![
            display_word(&w).into(),
            run.accept.into(),
            run.reject.into(),
            run.residual.into(),
            run.steps.into(),
            claimed.into(),
            classify_word(
                run.accept,
                AcceptanceMode::NegativeOneSidedBounded(0.5),
                opts.tol,
            )
            .to_string()
            .into(),
        ]);
    }
    Ok(Demo {
        report,
        machine: Machine::TwoWayKwqfa(m),
    })
}

/// Runtime scaling of the EQ machines on `(ab)^m`, `m = 1..=max_m`.
pub fn cmd_bench(max_m: usize, k: u32, opts: &RunOptions) -> Result<ExperimentReport> {
    let tq = build_eq_tqcfa(k)?;
    let kw = build_eq_15kwqfa();
    let mut report = ExperimentReport::new(
        format!("EQ runtime scaling, k = {k}"),
        &[
            "machine",
            "length",
            "mean_steps",
            "stddev_steps",
            "steps_per_n4",
            "capped",
            "seconds",
        ],
    );
    for m in 1..=max_m {
        let w = "ab".repeat(m);
        let n = w.len() as f64;
        let t = Instant::now();
        let s = tqcfa_monte_carlo(
            &tq,
            &w,
            opts.trials.max(1),
            opts.seed,
            opts.max_steps.unwrap_or(TQCFA_DEFAULT_MAX_STEPS),
        )?;
        report.push(vec![
            "eq-2qcfa".into(),
            w.len().into(),
            s.mean_steps.into(),
            s.stddev_steps.into(),
            (s.mean_steps / n.powi(4)).into(),
            s.capped.into(),
            t.elapsed().as_secs_f64().into(),
        ]);
    }
    for m in 1..=max_m {
        let w = "ab".repeat(m);
        let n = w.len() as f64;
        let t = Instant::now();
        let run = twoway_kwqfa_run(&kw, &w, kw.default_max_steps(w.len()))?;
        report.push(vec![
            "eq-15kwqfa".into(),
            w.len().into(),
            (run.steps as f64).into(),
            0.0.into(),
            (run.steps as f64 / n.powi(4)).into(),
            0u64.into(),
            t.elapsed().as_secs_f64().into(),
        ]);
    }
    report.note("trials", opts.trials.max(1));
    report.note("seed", opts.seed);
    Ok(report)
}

/// Default tolerance for numeric equivalence.
pub const DEFAULT_EQUIV_TOL: f64 = NUMERIC_RANK_TOL;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Rational;

    #[test]
    fn modp_run_members() {
        let m: Machine<f64> = Machine::Mcqfa(build_modp_2state(5, 1).unwrap());
        let words: Vec<String> = (0..=10).map(|j| "a".repeat(j)).collect();
        let bound = (PI / 5.0).cos().powi(2);
        let r = cmd_run(
            &m,
            &words,
            AcceptanceMode::NegativeOneSidedBounded(bound),
            &RunOptions::default(),
        )
        .unwrap();
        let members: Vec<usize> = r
            .column("decision")
            .unwrap()
            .iter()
            .enumerate()
            .filter(|(_, c)| ***c == Cell::Text("member".into()))
            .map(|(j, _)| j)
            .collect();
        assert_eq!(members, vec![0, 5, 10]);
        assert!(cmd_run(
            &m,
            &[],
            AcceptanceMode::PositiveOneSided,
            &RunOptions::default()
        )
        .unwrap()
        .rows
        .is_empty());
        assert!(matches!(
            cmd_run(
                &m,
                &["ab".into()],
                AcceptanceMode::PositiveOneSided,
                &RunOptions::default()
            ),
            Err(Error::Alphabet { .. })
        ));
    }

    #[test]
    fn eq15_run_values() {
        let m: Machine<f64> = Machine::TwoWayKwqfa(build_eq_15kwqfa());
        let r = cmd_run(
            &m,
            &["ab".into(), "aab".into()],
            AcceptanceMode::NegativeOneSided,
            &RunOptions::default(),
        )
        .unwrap();
        let v = r.column("value").unwrap();
        assert!(matches!(v[0], Cell::Num(x) if (x - 1.0).abs() < 1e-12));
        assert!(matches!(v[1], Cell::Num(x) if (x - 0.5).abs() < 1e-12));
    }

    #[test]
    fn equiv_modp_files() {
        let q = |k| Machine::<f64>::Mcqfa(build_modp_2state(5, k).unwrap());
        assert!(cmd_equiv(&q(1), &q(4), 1e-9).unwrap().verdict.equal);
        let out = cmd_equiv(&q(1), &q(2), 1e-9).unwrap();
        assert_eq!(out.verdict.witness.unwrap().word, "a");
        let tw: Machine<Rational> = Machine::TwoWayKwqfa(build_eq_15kwqfa());
        assert!(to_gfa(&tw).is_err());
    }

    #[test]
    fn demos() {
        let opts = RunOptions {
            trials: 200,
            ..RunOptions::default()
        };
        for name in DEMOS {
            let d = cmd_demo(
                name,
                &DemoParams {
                    max_len: Some(2),
                    ..DemoParams::default()
                },
                &opts,
            )
            .unwrap();
            assert!(!d.report.rows.is_empty(), "{name}");
        }
        assert!(matches!(
            cmd_demo("zeno", &DemoParams::default(), &opts),
            Err(Error::Unknown { .. })
        ));
        let d = cmd_demo(
            "pal-2qcfa",
            &DemoParams {
                words: vec!["aba".into()],
                ..DemoParams::default()
            },
            &opts,
        )
        .unwrap();
        assert_eq!(
            d.report.column("quantum_reject").unwrap()[0],
            &Cell::Num(0.0)
        );
    }
}
