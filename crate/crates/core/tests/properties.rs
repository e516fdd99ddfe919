mod common;

use num_traits::{One, Zero};
use proptest::prelude::*;
use qfa_core::classical::{classify_word, AcceptanceMode, Decision, Pfa};
use qfa_core::equivalence::{gfa_equiv, qfa_equiv, qfa_to_gfa};
use qfa_core::format::{parse_automaton_str, serialize_automaton, Machine};
use qfa_core::harness::{cmd_run, evaluate, RunOptions};
use qfa_core::numeric::{Rational, Real};
use qfa_core::oneway::{GeneralQfa, Kwqfa, Mcqfa};
use qfa_core::report::format_number;
use qfa_core::twoway::families::{
    build_eq_15kwqfa, build_eq_tqcfa, build_pal_tqcfa, eq_quantum_phase_reject, loop_semantics,
    pal_quantum_phase_reject, tqcfa_exact_accept, Family,
};
use qfa_core::twoway::kwqfa::twoway_kwqfa_run;
use qfa_core::twoway::tqcfa::tqcfa_monte_carlo;
use qfa_core::Alphabet;
use serde_json::Value;

use common::*;

fn ab() -> Alphabet {
    Alphabet::from_letters("ab")
}

fn word(max_len: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(prop_oneof![Just('a'), Just('b')], 0..=max_len)
        .prop_map(|v| v.into_iter().collect())
}

fn mode() -> impl Strategy<Value = AcceptanceMode> {
    prop_oneof![
        (0.0..1.0f64).prop_map(AcceptanceMode::CutpointStrict),
        (0.0..1.0f64).prop_map(AcceptanceMode::CutpointNonstrict),
        (0.0..0.5f64).prop_map(AcceptanceMode::BoundedError),
        Just(AcceptanceMode::PositiveOneSided),
        Just(AcceptanceMode::NegativeOneSided),
        (0.0..1.0f64).prop_map(AcceptanceMode::NegativeOneSidedBounded),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pfa_float_matches_exact(seed in any::<u64>(), n in 1usize..5, w in word(8)) {
        let p = random_pfa(n, &ab(), &mut rng(seed));
        let exact = p.accept_prob(&w).unwrap();
        let float = pfa_to_f64(&p).accept_prob(&w).unwrap();
        prop_assert_eq!(&exact, &oracle_pfa_accept(&p, &w));
        prop_assert!((0.0..=1.0).contains(&exact.to_f64()));
        prop_assert!((float - exact.to_f64()).abs() <= 1e-12);
    }

    #[test]
    fn lift_is_exact(seed in any::<u64>(), n in 1usize..5, w in word(8)) {
        let p = random_pfa(n, &ab(), &mut rng(seed));
        prop_assert_eq!(p.lift().value(&w).unwrap(), p.accept_prob(&w).unwrap());
    }

    #[test]
    fn dfa_values_are_indicators(seed in any::<u64>(), w in word(8)) {
        let mut r = rng(seed);
        let mut delta: Vec<Vec<usize>> = (0..4).map(|_| (0..3).map(|_| rand::Rng::gen_range(&mut r, 0..3)).collect()).collect();
        delta[0] = vec![0, 1, 2];
        delta[3] = vec![0, 1, 2];
        let p: Pfa<Rational> = Pfa::from_dfa(ab(), 3, &delta, vec![2]).unwrap();
        let mut q = 0;
        for c in w.chars() {
            q = delta[if c == 'a' { 1 } else { 2 }][q];
        }
        let expected = if q == 2 { Rational::one() } else { Rational::zero() };
        prop_assert_eq!(p.accept_prob(&w).unwrap(), expected);
    }

    #[test]
    fn classification_is_consistent(v in 0.0..=1.0f64, m in mode()) {
        let d = classify_word(v, m, 1e-9);
        match m {
            AcceptanceMode::CutpointStrict(l) => prop_assert_eq!(d == Decision::Member, v > l + 1e-9),
            AcceptanceMode::CutpointNonstrict(l) => prop_assert_eq!(d == Decision::Member, v >= l - 1e-9),
            AcceptanceMode::BoundedError(e) => {
                if v >= 1.0 - e + 1e-9 { prop_assert_eq!(d, Decision::Member) }
                if v <= e - 1e-9 { prop_assert_eq!(d, Decision::Nonmember) }
                if v > e + 1e-9 && v < 1.0 - e - 1e-9 { prop_assert_eq!(d, Decision::Undetermined) }
            }
            AcceptanceMode::PositiveOneSided => prop_assert_eq!(d == Decision::Member, v > 1e-9),
            AcceptanceMode::NegativeOneSided => prop_assert_eq!(d == Decision::Member, v >= 1.0 - 1e-9),
            AcceptanceMode::NegativeOneSidedBounded(e) => {
                prop_assert_eq!(d == Decision::Member, v >= 1.0 - 1e-9);
                if v < 1.0 - 1e-9 && v > e + 1e-9 { prop_assert_eq!(d, Decision::Undetermined) }
            }
        }
    }

    #[test]
    fn mcqfa_prefix_norms(seed in any::<u64>(), n in 1usize..6, w in word(10)) {
        let mut r = rng(seed);
        let m = Mcqfa::new(ab(), random_unitaries(n, 4, &mut r), vec![0], 1e-9).unwrap();
        for s in m.trajectory(&w).unwrap() {
            prop_assert!((s.norm_sqr() - 1.0).abs() <= 1e-12);
        }
        let p = m.accept_prob(&w).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
    }

    #[test]
    fn kwqfa_ledger_is_conserved(seed in any::<u64>(), n in 2usize..6, w in word(10)) {
        let mut r = rng(seed);
        let k = Kwqfa::new(ab(), random_unitaries(n, 4, &mut r), vec![0], vec![1], 1e-9).unwrap();
        let trace = k.ledger_trace(&w).unwrap();
        let mut last = (0.0, 0.0);
        for l in &trace {
            prop_assert!((l.total() - 1.0).abs() <= 1e-12);
            prop_assert!(l.accept >= last.0 && l.reject >= last.1);
            last = (l.accept, l.reject);
        }
        let (a, rej) = k.accept_reject(&w).unwrap();
        prop_assert!((a + rej - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn embedding_chain_preserves_acceptance(seed in any::<u64>(), n in 1usize..5, w in word(6)) {
        let mut r = rng(seed);
        let acc: Vec<usize> = (0..n).filter(|i| i % 2 == 0).collect();
        let m = Mcqfa::new(ab(), random_unitaries(n, 4, &mut r), acc, 1e-9).unwrap();
        let direct = m.accept_prob(&w).unwrap();
        let (via_kw, _) = Kwqfa::from_mcqfa(&m).accept_reject(&w).unwrap();
        let via_general = GeneralQfa::from_mcqfa(&m).accept_prob(&w).unwrap();
        prop_assert!((direct - via_kw).abs() <= 1e-12);
        prop_assert!((direct - via_general).abs() <= 1e-12);
    }

    #[test]
    fn linearization_preserves_values(seed in any::<u64>(), n in 1usize..4, w in word(6)) {
        let mut r = rng(seed);
        let chans = (0..4).map(|_| qfa_core::quantum::random_channel(n, 2, &mut r)).collect();
        let m = GeneralQfa::new(ab(), chans, vec![0], 1e-9).unwrap();
        let g = qfa_to_gfa(&m);
        prop_assert_eq!(g.states(), n * n);
        prop_assert!((g.value(&w).unwrap() - m.accept_prob(&w).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn equivalence_is_reflexive_and_bounded(seed in any::<u64>(), n in 1usize..4) {
        let mut r = rng(seed);
        let g1 = random_gfa(n, &ab(), &mut r);
        let g2 = random_gfa(n, &ab(), &mut r);
        let same = gfa_equiv(&g1, &similar(&g1, &random_invertible(n, &mut r))).unwrap();
        prop_assert!(same.equal && same.exact && same.extensions <= same.dimension);
        let other = gfa_equiv(&g1, &g2).unwrap();
        prop_assert!(other.extensions <= other.dimension);
        if let Some(wit) = other.witness {
            prop_assert!(wit.word.len() < g1.states() + g2.states());
            prop_assert!(wit.left != wit.right);
        }
    }

    #[test]
    fn pfa_and_its_quantum_simulation_are_equivalent(seed in any::<u64>(), n in 1usize..4) {
        let p = random_pfa(n, &ab(), &mut rng(seed));
        let v = qfa_equiv(&GeneralQfa::from_pfa(&p), &GeneralQfa::from_pfa(&p)).unwrap();
        prop_assert!(v.equal);
        prop_assert_eq!(p.lift().value("ab").unwrap(), qfa_to_gfa(&GeneralQfa::from_pfa(&p)).value("ab").unwrap());
    }

    #[test]
    fn loop_acceptance_is_monotone(r in 0.0..1.0f64, a1 in 0.001..1.0f64, a2 in 0.001..1.0f64) {
        let (lo, hi) = if a1 < a2 { (a1, a2) } else { (a2, a1) };
        let p_lo = loop_semantics(r, lo).unwrap();
        let p_hi = loop_semantics(r, hi).unwrap();
        prop_assert!(p_lo.accept <= p_hi.accept + 1e-15);
        prop_assert!(p_lo.expected_iterations >= p_hi.expected_iterations - 1e-9);
        prop_assert!((p_lo.accept + p_lo.reject - 1.0).abs() <= 1e-12);
        let p_r = loop_semantics((r + 0.1).min(1.0), lo).unwrap();
        prop_assert!(p_r.accept <= p_lo.accept + 1e-15);
    }

    #[test]
    fn eq_phase_detects_imbalance(w in word(10)) {
        let r = eq_quantum_phase_reject(&w).unwrap();
        let balanced = w.chars().filter(|&c| c == 'a').count() * 2 == w.len();
        if balanced { prop_assert_eq!(r, 0.0) } else { prop_assert!(r > 0.0) }
    }

    #[test]
    fn pal_phase_detects_asymmetry(w in word(8)) {
        let r = pal_quantum_phase_reject(&w).unwrap();
        let pal = w.chars().eq(w.chars().rev());
        if pal { prop_assert!(r.abs() <= 1e-12) } else { prop_assert!(r > 0.0) }
    }

    #[test]
    fn eq_15kwqfa_halts_within_two_sweeps(w in word(12)) {
        let m = build_eq_15kwqfa();
        let run = twoway_kwqfa_run(&m, &w, m.default_max_steps(w.len())).unwrap();
        prop_assert!(run.steps <= 2 * (w.len() + 2));
        prop_assert!(run.residual <= 1e-12);
        prop_assert!((run.accept + run.reject - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn run_report_csv_and_json_agree(seed in any::<u64>(), ws in proptest::collection::vec(word(6), 0..6)) {
        let p = Machine::Pfa(pfa_to_f64(&random_pfa(3, &ab(), &mut rng(seed))));
        let rep = cmd_run(&p, &ws, AcceptanceMode::CutpointStrict(0.5), &RunOptions::default()).unwrap();
        let json: Value = serde_json::from_str(&rep.to_json()).unwrap();
        let csv = rep.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        prop_assert_eq!(lines.len(), ws.len() + 1);
        for (i, line) in lines[1..].iter().enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            let from_json = json["rows"][i]["value"].as_f64().unwrap();
            prop_assert_eq!(fields[1].parse::<f64>().unwrap(), from_json);
            prop_assert_eq!(fields[1], format_number(from_json));
            prop_assert_eq!(json["rows"][i]["decision"].as_str().unwrap(), fields[2]);
        }
    }

    #[test]
    fn exact_files_round_trip(seed in any::<u64>(), n in 1usize..4, w in word(5)) {
        let mut r = rng(seed);
        let p = Machine::Pfa(random_pfa(n, &ab(), &mut r));
        let g = Machine::Gfa(random_gfa(n, &ab(), &mut r));
        for m in [p, g] {
            let back = parse_automaton_str::<Rational>(&serialize_automaton(&m), 0.0).unwrap();
            prop_assert_eq!(serialize_automaton(&back), serialize_automaton(&m));
            let opts = RunOptions::default();
            prop_assert_eq!(evaluate(&back, &w, &opts).unwrap().value, evaluate(&m, &w, &opts).unwrap().value);
        }
    }
}

#[test]
fn monte_carlo_matches_exact_grid() {
    let eq = build_eq_tqcfa(2).unwrap();
    let pal = build_pal_tqcfa(2).unwrap();
    let cases = [
        (Family::Eq, &eq, "b"),
        (Family::Eq, &eq, "abb"),
        (Family::Pal, &pal, "ab"),
        (Family::Pal, &pal, "ba"),
    ];
    for (fam, m, w) in cases {
        let exact = tqcfa_exact_accept(fam, w, 2).unwrap().accept;
        let s = tqcfa_monte_carlo(m, w, 20_000, 11, 10_000_000).unwrap();
        assert_eq!(s.capped, 0);
        assert!(
            s.within_sigmas(exact, 5.0),
            "{fam} {w}: {} vs {exact}",
            s.accept_frequency
        );
        assert_eq!(s.accepted + s.rejected, s.trials);
    }
}

#[test]
fn monte_carlo_is_reproducible() {
    let m = build_eq_tqcfa(2).unwrap();
    let a = tqcfa_monte_carlo(&m, "ab", 500, 3, 1_000_000).unwrap();
    let b = tqcfa_monte_carlo(&m, "ab", 500, 3, 1_000_000).unwrap();
    assert_eq!(a, b);
}

#[test]
fn eq_running_time_grows_polynomially() {
    let m = build_eq_tqcfa(2).unwrap();
    let mut means = Vec::new();
    for half in 1..=4 {
        let w = "ab".repeat(half);
        let s = tqcfa_monte_carlo(&m, &w, 400, 5, 100_000_000).unwrap();
        assert_eq!(s.accepted, s.trials);
        means.push((w.len() as f64, s.mean_steps));
    }
    for pair in means.windows(2) {
        assert!(pair[1].1 > pair[0].1, "{means:?}");
    }
    let ratios: Vec<f64> = means.iter().map(|(n, s)| s / n.powi(4)).collect();
    assert!(ratios.windows(2).all(|r| r[1] <= r[0] * 1.1), "{ratios:?}");
}
