//! Two-way (and 1.5-way) measure-many automata with a quantum head,
//! simulated on the configuration space `|q, pos⟩`.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use num_complex::Complex;
use num_traits::Zero;

use crate::alphabet::{Alphabet, LEFT_END};
use crate::classical::check_indices;
use crate::error::{Error, Result};
use crate::numeric::C64;

/// Default bound on the norm drift of one global step.
pub const DRIFT_TOL: f64 = 1e-10;
/// Live mass below which a run is considered finished.
pub const RESIDUAL_TOL: f64 = 1e-12;

const COMPLETION_TOL: f64 = 1e-9;

/// Head movement.
pub type Move = i8;

/// One term `α |target⟩` with head move `movement` of a local transition.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTransition {
    pub target: usize,
    pub movement: Move,
    pub amplitude: C64,
}

impl LocalTransition {
    pub fn new(target: usize, movement: Move, amplitude: C64) -> Self {
        LocalTransition {
            target,
            movement,
            amplitude,
        }
    }
}

/// Quantum-head automaton. `transitions[symbol][source]` lists the local
/// transition terms; an empty list means "unspecified" and is filled in by
/// completion at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoWayKwqfa {
    alphabet: Alphabet,
    state_names: Vec<String>,
    initial: usize,
    accepting: Vec<usize>,
    rejecting: Vec<usize>,
    one_and_half: bool,
    specified: Vec<Vec<Vec<LocalTransition>>>,
    transitions: Vec<Vec<Vec<LocalTransition>>>,
}

fn allowed_moves(symbol: usize, right_end: usize, one_and_half: bool) -> Vec<Move> {
    let mut moves = vec![0];
    if symbol != right_end {
        moves.push(1);
    }
    if !one_and_half && symbol != LEFT_END {
        moves.push(-1);
    }
    moves
}

fn move_slot(moves: &[Move], m: Move) -> usize {
    moves.iter().position(|&x| x == m).expect("validated move")
}

impl TwoWayKwqfa {
    /// `one_and_half` forbids left moves. Validates targets and moves and
    /// completes unspecified `(state, symbol)` entries.
    pub fn new(
        alphabet: Alphabet,
        state_names: Vec<String>,
        initial: usize,
        accepting: Vec<usize>,
        rejecting: Vec<usize>,
        one_and_half: bool,
        transitions: Vec<Vec<Vec<LocalTransition>>>,
    ) -> Result<Self> {
        let n = state_names.len();
        if n == 0 {
            return Err(Error::InvalidParameter("no states".into()));
        }
        if initial >= n {
            return Err(Error::InvalidParameter(format!(
                "initial state {initial} out of range"
            )));
        }
        check_indices(&accepting, n)?;
        check_indices(&rejecting, n)?;
        if let Some(q) = accepting.iter().find(|q| rejecting.contains(q)) {
            return Err(Error::InvalidParameter(format!(
                "state '{}' is both accepting and rejecting",
                state_names[*q]
            )));
        }
        if transitions.len() != alphabet.symbol_count() {
            return Err(Error::Dimension(format!(
                "{} transition tables for {} tape symbols",
                transitions.len(),
                alphabet.symbol_count()
            )));
        }
        for (s, table) in transitions.iter().enumerate() {
            if table.len() != n {
                return Err(Error::Dimension(format!(
                    "transition '{}' has {} source states, expected {n}",
                    alphabet.symbol_key(s),
                    table.len()
                )));
            }
            let moves = allowed_moves(s, alphabet.right_end(), one_and_half);
            for (q, terms) in table.iter().enumerate() {
                for t in terms {
                    if t.target >= n {
                        return Err(Error::InvalidParameter(format!(
                            "transition target {} out of range",
                            t.target
                        )));
                    }
                    if !moves.contains(&t.movement) {
                        return Err(Error::InvalidParameter(format!(
                            "move {} not allowed from state '{}' on '{}'",
                            t.movement,
                            state_names[q],
                            alphabet.symbol_key(s)
                        )));
                    }
                }
            }
        }
        let mut m = TwoWayKwqfa {
            alphabet,
            state_names,
            initial,
            accepting,
            rejecting,
            one_and_half,
            specified: transitions.clone(),
            transitions,
        };
        m.complete();
        Ok(m)
    }

    /// Fills every empty `(symbol, source)` entry with a unit local vector
    /// orthogonal to all other entries of the same symbol. Candidates are
    /// tried in order: `(source, stay)`, then `(q, c)` for `c` in
    /// `0, +1, -1` and `q` ascending.
    fn complete(&mut self) {
        let n = self.states();
        for s in 0..self.alphabet.symbol_count() {
            let moves = allowed_moves(s, self.alphabet.right_end(), self.one_and_half);
            let dim = n * moves.len();
            let to_vec = |terms: &[LocalTransition]| {
                let mut v = vec![C64::zero(); dim];
                for t in terms {
                    v[move_slot(&moves, t.movement) * n + t.target] += t.amplitude;
                }
                v
            };
            let mut basis: Vec<Vec<C64>> = Vec::new();
            for terms in &self.transitions[s] {
                if !terms.is_empty() {
                    push_orthogonal(&mut basis, to_vec(terms));
                }
            }
            for q in 0..n {
                if !self.transitions[s][q].is_empty() {
                    continue;
                }
                let candidates = std::iter::once(q).chain(0..dim);
                for slot in candidates {
                    let mut e = vec![C64::zero(); dim];
                    e[slot] = Complex::new(1.0, 0.0);
                    let Some(v) = residual(&basis, e) else {
                        continue;
                    };
                    basis.push(v.clone());
                    self.transitions[s][q] = v
                        .iter()
                        .enumerate()
                        .filter(|(_, a)| a.norm() > 1e-15)
                        .map(|(i, a)| LocalTransition::new(i % n, moves[i / n], *a))
                        .collect();
                    break;
                }
            }
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn states(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn accepting(&self) -> &[usize] {
        &self.accepting
    }

    pub fn rejecting(&self) -> &[usize] {
        &self.rejecting
    }

    pub fn is_one_and_half(&self) -> bool {
        self.one_and_half
    }

    /// Transition terms as given, before completion.
    pub fn specified(&self) -> &[Vec<Vec<LocalTransition>>] {
        &self.specified
    }

    /// Completed transition terms.
    pub fn transitions(&self) -> &[Vec<Vec<LocalTransition>>] {
        &self.transitions
    }

    fn is_halting(&self, q: usize) -> bool {
        self.accepting.contains(&q) || self.rejecting.contains(&q)
    }

    pub fn default_max_steps(&self, word_len: usize) -> usize {
        10 * (word_len + 2) * self.states()
    }

    fn config_name(&self, c: usize) -> String {
        let n = self.states();
        format!("({}, {})", self.state_names[c % n], c / n)
    }

    /// Image of basis configuration `c` under the global operator, as a
    /// sparse vector.
    fn column(&self, tape: &[usize], c: usize) -> Result<BTreeMap<usize, C64>> {
        let n = self.states();
        let (q, pos) = (c % n, c / n);
        let mut out = BTreeMap::new();
        for t in &self.transitions[tape[pos]][q] {
            let p = pos as i64 + t.movement as i64;
            if p < 0 || p >= tape.len() as i64 {
                return Err(Error::WellFormedness(format!(
                    "head leaves the tape from {}",
                    self.config_name(c)
                )));
            }
            *out.entry(p as usize * n + t.target).or_insert(C64::zero()) += t.amplitude;
        }
        Ok(out)
    }
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn residual(basis: &[Vec<C64>], mut v: Vec<C64>) -> Option<Vec<C64>> {
    for b in basis {
        let c = inner(b, &v);
        for (x, y) in v.iter_mut().zip(b) {
            *x -= c * y;
        }
    }
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm <= COMPLETION_TOL {
        return None;
    }
    Some(v.into_iter().map(|x| x / norm).collect())
}

fn push_orthogonal(basis: &mut Vec<Vec<C64>>, v: Vec<C64>) {
    if let Some(r) = residual(basis, v) {
        basis.push(r);
    }
}

/// Superposition over configurations `|q, pos⟩`, index `pos·|Q| + q`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigState {
    pub tape_len: usize,
    pub states: usize,
    pub amplitudes: Vec<C64>,
}

impl ConfigState {
    pub fn initial(tape_len: usize, states: usize, q0: usize) -> Self {
        let mut amplitudes = vec![C64::zero(); tape_len * states];
        amplitudes[q0] = Complex::new(1.0, 0.0);
        ConfigState {
            tape_len,
            states,
            amplitudes,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoWayRun {
    pub accept: f64,
    pub reject: f64,
    pub residual: f64,
    pub steps: usize,
    /// Largest `|‖live‖² + p_acc + p_rej − 1|` observed after any step.
    pub max_ledger_defect: f64,
}

/// Evolves the configuration superposition, measuring the halting
/// configurations after every step.
pub fn twoway_kwqfa_run(m: &TwoWayKwqfa, word: &str, max_steps: usize) -> Result<TwoWayRun> {
    let tape = m.alphabet.tape(word)?;
    let n = m.states();
    let mut psi = ConfigState::initial(tape.len(), n, m.initial);
    let (mut accept, mut reject) = (0.0, 0.0);
    let mut max_ledger_defect: f64 = 0.0;
    let mut steps = 0;
    let mut live = psi.norm_sqr();
    while live >= RESIDUAL_TOL && steps < max_steps {
        let mut next = vec![C64::zero(); psi.amplitudes.len()];
        for (c, a) in psi.amplitudes.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (d, b) in m.column(&tape, c)? {
                next[d] += a * b;
            }
        }
        steps += 1;
        let after: f64 = next.iter().map(|a| a.norm_sqr()).sum();
        if (after - live).abs() > DRIFT_TOL {
            return Err(Error::WellFormedness(format!(
                "global step {steps} changed the norm from {live:.12} to {after:.12} on '{word}'"
            )));
        }
        for (c, a) in next.iter_mut().enumerate() {
            let q = c % n;
            if m.accepting.contains(&q) {
                accept += a.norm_sqr();
                *a = C64::zero();
            } else if m.rejecting.contains(&q) {
                reject += a.norm_sqr();
                *a = C64::zero();
            }
        }
        psi.amplitudes = next;
        live = psi.norm_sqr();
        max_ledger_defect = max_ledger_defect.max((live + accept + reject - 1.0).abs());
    }
    Ok(TwoWayRun {
        accept,
        reject,
        residual: live,
        steps,
        max_ledger_defect,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WellformednessViolation {
    pub word: String,
    pub first: String,
    pub second: String,
    /// `⟨U c₁ | U c₂⟩`, expected `δ(c₁, c₂)`.
    pub overlap: C64,
}

impl fmt::Display for WellformednessViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "on '{}': <U{}|U{}> = {:.6}{:+.6}i",
            self.word, self.first, self.second, self.overlap.re, self.overlap.im
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LengthReport {
    pub length: usize,
    pub words_checked: usize,
    pub violation: Option<WellformednessViolation>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WellformednessReport {
    pub lengths: Vec<LengthReport>,
}

impl WellformednessReport {
    pub fn passed(&self) -> bool {
        self.lengths.iter().all(|l| l.violation.is_none())
    }

    pub fn first_violation(&self) -> Option<&WellformednessViolation> {
        self.lengths.iter().find_map(|l| l.violation.as_ref())
    }
}

fn reachable(m: &TwoWayKwqfa, tape: &[usize]) -> Result<Vec<usize>> {
    let mut seen = HashSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([m.initial]);
    seen.insert(m.initial);
    while let Some(c) = queue.pop_front() {
        if m.is_halting(c % m.states()) {
            continue;
        }
        order.push(c);
        for (d, a) in m.column(tape, c)? {
            if a.norm() > 1e-15 && seen.insert(d) {
                queue.push_back(d);
            }
        }
    }
    order.sort_unstable();
    Ok(order)
}

fn check_word(m: &TwoWayKwqfa, word: &str, tol: f64) -> Result<Option<WellformednessViolation>> {
    let tape = m.alphabet.tape(word)?;
    let configs = reachable(m, &tape)?;
    let cols = configs
        .iter()
        .map(|&c| m.column(&tape, c))
        .collect::<Result<Vec<_>>>()?;
    for i in 0..cols.len() {
        for j in i..cols.len() {
            let overlap: C64 = cols[i]
                .iter()
                .filter_map(|(k, a)| cols[j].get(k).map(|b| a.conj() * b))
                .sum();
            let expected = if i == j { 1.0 } else { 0.0 };
            if (overlap - expected).norm() > tol {
                return Ok(Some(WellformednessViolation {
                    word: word.to_string(),
                    first: m.config_name(configs[i]),
                    second: m.config_name(configs[j]),
                    overlap,
                }));
            }
        }
    }
    Ok(None)
}

/// For every word of each length, checks that the global operator is an
/// isometry on the span of configurations reachable from the start.
pub fn check_wellformed(m: &TwoWayKwqfa, lengths: &[usize]) -> Result<WellformednessReport> {
    check_wellformed_with_tol(m, lengths, DRIFT_TOL)
}

pub fn check_wellformed_with_tol(
    m: &TwoWayKwqfa,
    lengths: &[usize],
    tol: f64,
) -> Result<WellformednessReport> {
    let mut out = Vec::new();
    for &len in lengths {
        let words = words_of_length(&m.alphabet, len);
        let mut violation = None;
        for w in &words {
            if let Some(v) = check_word(m, w, tol)? {
                violation = Some(v);
                break;
            }
        }
        out.push(LengthReport {
            length: len,
            words_checked: words.len(),
            violation,
        });
    }
    Ok(WellformednessReport { lengths: out })
}

fn words_of_length(alphabet: &Alphabet, len: usize) -> Vec<String> {
    let mut layer = vec![String::new()];
    for _ in 0..len {
        layer = layer
            .iter()
            .flat_map(|w| alphabet.letters().iter().map(move |c| format!("{w}{c}")))
            .collect();
    }
    layer
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> C64 {
        Complex::new(1.0, 0.0)
    }

    /// Every state stays put; only the `¢` entry of the start state is given.
    fn identity_machine() -> TwoWayKwqfa {
        let ab = Alphabet::from_letters("ab");
        let mut t = vec![vec![Vec::new(); 2]; 4];
        for table in t.iter_mut() {
            for (q, terms) in table.iter_mut().enumerate() {
                terms.push(LocalTransition::new(q, 0, one()));
            }
        }
        TwoWayKwqfa::new(
            ab,
            vec!["s".into(), "t".into()],
            0,
            vec![],
            vec![],
            false,
            t,
        )
        .unwrap()
    }

    #[test]
    fn identity_machine_is_wellformed_and_never_halts() {
        let m = identity_machine();
        assert!(check_wellformed(&m, &[0, 1, 2, 3]).unwrap().passed());
        let run = twoway_kwqfa_run(&m, "ab", 7).unwrap();
        assert_eq!((run.accept, run.reject, run.steps), (0.0, 0.0, 7));
        assert!((run.residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn entering_reject_on_left_end_halts_in_one_step() {
        let ab = Alphabet::from_letters("ab");
        let mut t = vec![vec![Vec::new(); 2]; 4];
        t[0][0].push(LocalTransition::new(1, 1, one()));
        let m = TwoWayKwqfa::new(
            ab,
            vec!["s".into(), "r".into()],
            0,
            vec![],
            vec![1],
            true,
            t,
        )
        .unwrap();
        let run = twoway_kwqfa_run(&m, "abba", 100).unwrap();
        assert_eq!(
            (run.accept, run.reject, run.residual, run.steps),
            (0.0, 1.0, 0.0, 1)
        );
    }

    #[test]
    fn short_local_row_is_reported() {
        let ab = Alphabet::from_letters("ab");
        let mut t = vec![vec![Vec::new(); 2]; 4];
        t[0][0].push(LocalTransition::new(0, 1, Complex::new(0.9, 0.0)));
        t[1][0].push(LocalTransition::new(0, 1, one()));
        t[2][0].push(LocalTransition::new(0, 1, one()));
        t[3][0].push(LocalTransition::new(1, 0, one()));
        let m = TwoWayKwqfa::new(
            ab,
            vec!["s".into(), "a".into()],
            0,
            vec![1],
            vec![],
            true,
            t,
        )
        .unwrap();
        let report = check_wellformed(&m, &[1]).unwrap();
        let v = report.first_violation().expect("violation");
        assert_eq!(v.first, "(s, 0)");
        assert_eq!(v.second, "(s, 0)");
        assert!((v.overlap.re - 0.81).abs() < 1e-12);
        assert!(matches!(
            twoway_kwqfa_run(&m, "a", 10),
            Err(Error::WellFormedness(_))
        ));
    }

    #[test]
    fn illegal_moves_rejected() {
        let ab = Alphabet::from_letters("ab");
        let mut t = vec![vec![Vec::new(); 1]; 4];
        t[0][0].push(LocalTransition::new(0, -1, one()));
        assert!(
            TwoWayKwqfa::new(ab.clone(), vec!["s".into()], 0, vec![], vec![], false, t).is_err()
        );
        let mut t = vec![vec![Vec::new(); 1]; 4];
        t[3][0].push(LocalTransition::new(0, 1, one()));
        assert!(
            TwoWayKwqfa::new(ab.clone(), vec!["s".into()], 0, vec![], vec![], false, t).is_err()
        );
        let mut t = vec![vec![Vec::new(); 1]; 4];
        t[1][0].push(LocalTransition::new(0, -1, one()));
        assert!(TwoWayKwqfa::new(ab, vec!["s".into()], 0, vec![], vec![], true, t).is_err());
    }

    #[test]
    fn completion_prefers_self_loops() {
        let m = identity_machine();
        let ab = Alphabet::from_letters("ab");
        let t = vec![vec![Vec::new(); 2]; 4];
        let blank = TwoWayKwqfa::new(
            ab,
            vec!["s".into(), "t".into()],
            0,
            vec![],
            vec![],
            false,
            t,
        )
        .unwrap();
        assert_eq!(blank.transitions(), m.transitions());
    }
}
