//! Named two-way machines for `EQ = {w : |w|_a = |w|_b}` and palindromes,
//! with their closed-form loop analysis.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::alphabet::{Alphabet, LEFT_END};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::numeric::{Rational, Real, C64};
use crate::oneway::rotation;
use crate::quantum::BasisPartition;
use crate::twoway::kwqfa::{LocalTransition, Move, TwoWayKwqfa};
use crate::twoway::tqcfa::{QuantumAction, Rule, Tqcfa};

/// One iteration of a 2QCFA loop: quantum phase rejects with probability
/// `r`, otherwise the classical phase accepts with probability `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopProfile {
    pub reject_per_iteration: f64,
    pub accept_per_iteration: f64,
    pub accept: f64,
    pub reject: f64,
    pub expected_iterations: f64,
}

pub fn loop_semantics(r: f64, a: f64) -> Result<LoopProfile> {
    for (name, x) in [("r", r), ("a", a)] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidParameter(format!(
                "{name} = {x} is not a probability"
            )));
        }
    }
    let halt = r + (1.0 - r) * a;
    if halt == 0.0 {
        return Err(Error::NonTermination(
            "r = a = 0: the loop never halts".into(),
        ));
    }
    let accept = (1.0 - r) * a / halt;
    Ok(LoopProfile {
        reject_per_iteration: r,
        accept_per_iteration: a,
        accept,
        reject: 1.0 - accept,
        expected_iterations: 1.0 / halt,
    })
}

fn letter_counts(word: &str) -> Result<(i64, i64)> {
    let ab = Alphabet::from_letters("ab");
    let enc = ab.encode(word)?;
    let a = enc.iter().filter(|&&s| s == 1).count() as i64;
    Ok((a, enc.len() as i64 - a))
}

pub fn is_balanced(word: &str) -> Result<bool> {
    let (a, b) = letter_counts(word)?;
    Ok(a == b)
}

pub fn is_palindrome(word: &str) -> bool {
    word.chars().eq(word.chars().rev())
}

/// `sin²(√2π·(|w|_a − |w|_b))`.
pub fn eq_quantum_phase_reject(word: &str) -> Result<f64> {
    let (a, b) = letter_counts(word)?;
    if a == b {
        return Ok(0.0);
    }
    Ok((SQRT_2 * PI * (a - b) as f64).sin().powi(2))
}

fn pal_matrix(letter: usize) -> Matrix<Rational> {
    let q = |x: i64| Rational::from_ratio(x, 5);
    let rows = if letter == 1 {
        vec![
            vec![q(4), q(3), q(0)],
            vec![q(-3), q(4), q(0)],
            vec![q(0), q(0), q(5)],
        ]
    } else {
        vec![
            vec![q(4), q(0), q(3)],
            vec![q(0), q(5), q(0)],
            vec![q(-3), q(0), q(4)],
        ]
    };
    Matrix::from_rows(rows).expect("3x3")
}

/// The two letter rotations `U_a`, `U_b` of the palindrome machine.
pub fn pal_unitaries() -> [Matrix<Rational>; 2] {
    [pal_matrix(1), pal_matrix(2)]
}

/// `1 − |⟨q₁|U⁻¹_{w_n}…U⁻¹_{w_1}U_{w_n}…U_{w_1}|q₁⟩|²`, exactly.
pub fn pal_quantum_phase_reject_exact(word: &str) -> Result<Rational> {
    let ab = Alphabet::from_letters("ab");
    let enc = ab.encode(word)?;
    let [ua, ub] = pal_unitaries();
    let (ua_inv, ub_inv) = (ua.transpose(), ub.transpose());
    let mut psi = vec![Rational::one(), Rational::zero(), Rational::zero()];
    for &s in &enc {
        psi = if s == 1 { &ua } else { &ub }.mul_vec(&psi)?;
    }
    for &s in &enc {
        psi = if s == 1 { &ua_inv } else { &ub_inv }.mul_vec(&psi)?;
    }
    Ok(Rational::one() - psi[0].clone() * psi[0].clone())
}

pub fn pal_quantum_phase_reject(word: &str) -> Result<f64> {
    Ok(pal_quantum_phase_reject_exact(word)?.to_f64())
}

/// Per-iteration accept probability of the EQ gadget on a word of length `n`.
pub fn eq_gadget_accept(n: usize, k: u32) -> f64 {
    0.5f64.powi(k as i32) / ((n + 1) as f64).powi(2)
}

/// Per-iteration accept probability of the palindrome gadget.
pub fn pal_gadget_accept(n: usize, k: u32) -> f64 {
    0.5f64.powi((4 * k as usize * n) as i32)
}

/// Lower bound on the reject probability of a nonmember of EQ.
pub fn eq_reject_bound(k: u32) -> f64 {
    let t = 2f64.powi(k as i32);
    t / (t + 2.0)
}

/// Lower bound on the reject probability of a non-palindrome.
pub fn pal_reject_bound(k: u32) -> f64 {
    16.0 * k as f64 / (16.0 * k as f64 + 25.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Eq,
    Pal,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "eq" => Ok(Family::Eq),
            "pal" => Ok(Family::Pal),
            _ => Err(Error::Unknown {
                kind: "machine family",
                name: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Eq => "EQ",
            Family::Pal => "PAL",
        })
    }
}

pub fn tqcfa_exact_accept(family: Family, word: &str, k: u32) -> Result<LoopProfile> {
    let n = word.chars().count();
    match family {
        Family::Eq => loop_semantics(eq_quantum_phase_reject(word)?, eq_gadget_accept(n, k)),
        Family::Pal => loop_semantics(pal_quantum_phase_reject(word)?, pal_gadget_accept(n, k)),
    }
}

fn check_k(k: u32) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must be greater than 1"
        )));
    }
    Ok(())
}

struct Builder {
    names: Vec<String>,
    rules: BTreeMap<(usize, usize), Rule>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            names: Vec::new(),
            rules: BTreeMap::new(),
        }
    }

    fn state(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    fn unitary(&mut self, s: usize, syms: &[usize], u: &Matrix<C64>, next: usize, mv: Move) {
        for &sym in syms {
            self.rules.insert(
                (s, sym),
                Rule {
                    action: QuantumAction::Unitary(u.clone()),
                    branches: vec![(next, mv)],
                },
            );
        }
    }

    fn measure(
        &mut self,
        s: usize,
        syms: &[usize],
        p: &BasisPartition,
        branches: &[(usize, Move)],
    ) {
        for &sym in syms {
            self.rules.insert(
                (s, sym),
                Rule {
                    action: QuantumAction::Measure(p.clone()),
                    branches: branches.to_vec(),
                },
            );
        }
    }
}

fn real_matrix(rows: &[&[f64]]) -> Matrix<C64> {
    Matrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&x| Complex::new(x, 0.0)).collect())
            .collect(),
    )
    .expect("rectangular")
}

fn labelled(dim: usize, blocks: &[(&str, &[usize])]) -> BasisPartition {
    BasisPartition::new(
        dim,
        blocks
            .iter()
            .map(|(l, b)| (l.to_string(), b.to_vec()))
            .collect(),
    )
    .expect("partition")
}

const A: usize = 1;
const B: usize = 2;
const END: usize = 3;
const LETTERS: [usize; 2] = [A, B];

/// EQ machine: a rotation pass (by `√2π` on `a`, `−√2π` on `b`) measured at
/// `$`, then two head random walks from `¢` that must each reach `$`, then
/// `k` coin flips that must all come up `q₁`.
pub fn build_eq_tqcfa(k: u32) -> Result<Tqcfa> {
    check_k(k)?;
    let theta = SQRT_2 * PI;
    let id = Matrix::<C64>::identity(2);
    let h = FRAC_1_SQRT_2;
    let had = real_matrix(&[&[h, h], &[h, -h]]);
    let flip = real_matrix(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let split = labelled(2, &[("q1", &[0]), ("q2", &[1])]);

    let mut b = Builder::new();
    let pass = b.state("pass");
    let acc = b.state("acc");
    let rej = b.state("rej");
    let rewind1 = b.state("rewind1");
    let walk1 = b.state("walk1");
    let step1 = b.state("step1");
    let rewind2 = b.state("rewind2");
    let walk2 = b.state("walk2");
    let step2 = b.state("step2");
    let coins: Vec<(usize, usize)> = (0..k)
        .map(|i| (b.state(format!("coin{i}")), b.state(format!("flip{i}"))))
        .collect();
    let fail = b.state("fail");
    let fix = b.state("fix");

    b.unitary(pass, &[LEFT_END], &id, pass, 1);
    b.unitary(pass, &[A], &rotation(theta), pass, 1);
    b.unitary(pass, &[B], &rotation(-theta), pass, 1);
    b.measure(pass, &[END], &split, &[(rewind1, -1), (rej, 0)]);

    for (rewind, walk, step, next) in [
        (rewind1, walk1, step1, rewind2),
        (rewind2, walk2, step2, coins[0].0),
    ] {
        b.unitary(rewind, &LETTERS, &id, rewind, -1);
        b.unitary(rewind, &[LEFT_END], &id, walk, 1);
        b.unitary(walk, &LETTERS, &had, step, 0);
        b.measure(step, &LETTERS, &split, &[(walk, -1), (walk, 1)]);
        b.measure(walk, &[LEFT_END], &split, &[(pass, 0), (fix, 0)]);
        if next == rewind2 {
            b.unitary(walk, &[END], &id, next, -1);
        } else {
            b.unitary(walk, &[END], &id, next, 0);
        }
    }
    for (i, &(coin, flipped)) in coins.iter().enumerate() {
        let success = coins.get(i + 1).map_or(acc, |c| c.0);
        b.unitary(coin, &[END], &had, flipped, 0);
        b.measure(flipped, &[END], &split, &[(success, 0), (fail, -1)]);
    }
    b.unitary(fail, &LETTERS, &id, fail, -1);
    b.measure(fail, &[LEFT_END], &split, &[(pass, 0), (fix, 0)]);
    b.unitary(fix, &[LEFT_END], &flip, pass, 0);

    Tqcfa::new(
        Alphabet::from_letters("ab"),
        b.names,
        2,
        pass,
        acc,
        rej,
        b.rules,
    )
}

/// Palindrome machine: `U_w` on a left-to-right pass, `U_w⁻¹` letter by
/// letter on a second pass, full measurement at `$`; then `4k` head sweeps
/// flipping a coin on every letter, all of which must come up `q₁`.
pub fn build_pal_tqcfa(k: u32) -> Result<Tqcfa> {
    check_k(k)?;
    let to_c = |m: &Matrix<Rational>| m.map(|x| Complex::new(x.to_f64(), 0.0));
    let [ua, ub] = pal_unitaries();
    let (ua_inv, ub_inv) = (to_c(&ua.transpose()), to_c(&ub.transpose()));
    let (ua, ub) = (to_c(&ua), to_c(&ub));
    let id = Matrix::<C64>::identity(3);
    let h = FRAC_1_SQRT_2;
    let coin = real_matrix(&[&[h, h, 0.0], &[h, -h, 0.0], &[0.0, 0.0, 1.0]]);
    let swap12 = real_matrix(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]);
    let swap13 = real_matrix(&[&[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0]]);
    let full = labelled(3, &[("q1", &[0]), ("q2", &[1]), ("q3", &[2])]);
    let heads = labelled(3, &[("q1", &[0]), ("q23", &[1, 2])]);

    let mut b = Builder::new();
    let pass1 = b.state("pass1");
    let acc = b.state("acc");
    let rej = b.state("rej");
    let back = b.state("back");
    let pass2 = b.state("pass2");
    let sweeps: Vec<(usize, usize)> = (0..4 * k)
        .map(|i| (b.state(format!("sweep{i}")), b.state(format!("toss{i}"))))
        .collect();
    let fail = b.state("fail");
    let fix2 = b.state("fix2");
    let fix3 = b.state("fix3");

    b.unitary(pass1, &[LEFT_END], &id, pass1, 1);
    b.unitary(pass1, &[A], &ua, pass1, 1);
    b.unitary(pass1, &[B], &ub, pass1, 1);
    b.unitary(pass1, &[END], &id, back, -1);
    b.unitary(back, &LETTERS, &id, back, -1);
    b.unitary(back, &[LEFT_END], &id, pass2, 1);
    b.unitary(pass2, &[A], &ua_inv, pass2, 1);
    b.unitary(pass2, &[B], &ub_inv, pass2, 1);
    b.measure(
        pass2,
        &[END],
        &full,
        &[(sweeps[0].0, -1), (rej, 0), (rej, 0)],
    );

    for (i, &(sweep, toss)) in sweeps.iter().enumerate() {
        let leftward = i % 2 == 0;
        let dir: Move = if leftward { -1 } else { 1 };
        let next = sweeps.get(i + 1).map_or(acc, |s| s.0);
        b.unitary(sweep, &LETTERS, &coin, toss, 0);
        b.measure(toss, &LETTERS, &heads, &[(sweep, dir), (fail, -1)]);
        let (edge, back_in) = if leftward { (LEFT_END, 1) } else { (END, -1) };
        b.unitary(
            sweep,
            &[edge],
            &id,
            next,
            if next == acc { 0 } else { back_in },
        );
    }
    b.unitary(fail, &LETTERS, &id, fail, -1);
    b.unitary(fail, &[END], &id, fail, -1);
    b.measure(
        fail,
        &[LEFT_END],
        &full,
        &[(pass1, 0), (fix2, 0), (fix3, 0)],
    );
    b.unitary(fix2, &[LEFT_END], &swap12, pass1, 0);
    b.unitary(fix3, &[LEFT_END], &swap13, pass1, 0);

    Tqcfa::new(
        Alphabet::from_letters("ab"),
        b.names,
        3,
        pass1,
        acc,
        rej,
        b.rules,
    )
}

/// Five-state 1.5-way machine for EQ. The branch through `q₁` spends two
/// steps per `a` and one per `b`, the branch through `q₂` the reverse; they
/// meet on `$` (and interfere) iff the counts agree.
pub fn build_eq_15kwqfa() -> TwoWayKwqfa {
    let (q1, q2, qw, qa, qr) = (0, 1, 2, 3, 4);
    let amp = |x: f64| Complex::new(x, 0.0);
    let h = FRAC_1_SQRT_2;
    let t = LocalTransition::new;
    let mut table = vec![vec![Vec::new(); 5]; 4];
    table[LEFT_END][q1] = vec![t(q1, 1, amp(h)), t(q2, 1, amp(h))];
    table[A][q1] = vec![t(qw, 0, amp(1.0))];
    table[A][qw] = vec![t(q1, 1, amp(1.0))];
    table[A][q2] = vec![t(q2, 1, amp(1.0))];
    table[B][q2] = vec![t(qw, 0, amp(1.0))];
    table[B][qw] = vec![t(q2, 1, amp(1.0))];
    table[B][q1] = vec![t(q1, 1, amp(1.0))];
    table[END][q1] = vec![t(qa, 0, amp(h)), t(qr, 0, amp(h))];
    table[END][q2] = vec![t(qa, 0, amp(h)), t(qr, 0, amp(-h))];
    let names = ["q1", "q2", "qw", "qa", "qr"].map(String::from).to_vec();
    TwoWayKwqfa::new(
        Alphabet::from_letters("ab"),
        names,
        q1,
        vec![qa],
        vec![qr],
        true,
        table,
    )
    .expect("valid construction")
}
