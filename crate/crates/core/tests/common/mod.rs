#![allow(dead_code)]

use num_complex::Complex;
use num_traits::{One, Zero};
use qfa_core::classical::{Gfa, Pfa};
use qfa_core::numeric::{Rational, Real, C64};
use qfa_core::quantum::{random_unitary, StateVector};
use qfa_core::{Alphabet, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

/// Column-stochastic matrix with small-denominator rational entries.
pub fn random_stochastic(n: usize, rng: &mut impl Rng) -> Matrix<Rational> {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        let mut w: Vec<i64> = (0..n).map(|_| rng.gen_range(0..6)).collect();
        if w.iter().all(|&x| x == 0) {
            w[rng.gen_range(0..n)] = 1;
        }
        let total: i64 = w.iter().sum();
        for j in 0..n {
            m[(j, i)] = q(w[j], total);
        }
    }
    m
}

pub fn random_pfa(n: usize, alphabet: &Alphabet, rng: &mut impl Rng) -> Pfa<Rational> {
    let ts = (0..alphabet.symbol_count())
        .map(|_| random_stochastic(n, rng))
        .collect();
    let mut acc: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
    if acc.is_empty() {
        acc.push(n - 1);
    }
    Pfa::new(alphabet.clone(), ts, acc, 0.0).unwrap()
}

pub fn pfa_to_f64(p: &Pfa<Rational>) -> Pfa<f64> {
    let ts = p.transitions().iter().map(|m| m.to_f64()).collect();
    Pfa::new(p.alphabet().clone(), ts, p.accepting().to_vec(), 1e-12).unwrap()
}

pub fn random_word(alphabet: &Alphabet, max_len: usize, rng: &mut impl Rng) -> String {
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| alphabet.letters()[rng.gen_range(0..alphabet.len())])
        .collect()
}

/// Acceptance of a column-stochastic PFA, by direct distribution pushing.
pub fn oracle_pfa_accept<R: Real>(p: &Pfa<R>, word: &str) -> R {
    let tape = p.alphabet().tape(word).unwrap();
    let n = p.states();
    let mut dist = vec![R::zero(); n];
    dist[0] = R::one();
    for s in tape {
        let m = &p.transitions()[s];
        let mut next = vec![R::zero(); n];
        for (i, mass) in dist.iter().enumerate() {
            for (j, slot) in next.iter_mut().enumerate() {
                *slot = slot.clone() + m[(j, i)].clone() * mass.clone();
            }
        }
        dist = next;
    }
    p.accepting()
        .iter()
        .fold(R::zero(), |acc, &i| acc + dist[i].clone())
}

/// `f · M_$ · M_{w_n} ⋯ M_{w_1} · M_¢ · x`, evaluated independently.
pub fn oracle_gfa_value(g: &Gfa<Rational>, word: &str) -> Rational {
    let tape = g.alphabet().tape(word).unwrap();
    let mut v = g.initial().to_vec();
    for s in tape {
        let m = &g.transitions()[s];
        v = (0..v.len())
            .map(|j| {
                (0..v.len()).fold(Rational::zero(), |acc, i| {
                    acc + m[(j, i)].clone() * v[i].clone()
                })
            })
            .collect();
    }
    v.iter()
        .zip(g.final_vector())
        .fold(Rational::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

fn small_rational(rng: &mut impl Rng) -> Rational {
    q(rng.gen_range(-3..=3), rng.gen_range(1..=3))
}

pub fn random_gfa(n: usize, alphabet: &Alphabet, rng: &mut impl Rng) -> Gfa<Rational> {
    let ts = (0..alphabet.symbol_count())
        .map(|_| {
            Matrix::from_fn(n, n, |_, _| {
                if rng.gen_bool(0.4) {
                    Rational::zero()
                } else {
                    small_rational(rng)
                }
            })
        })
        .collect();
    let init = (0..n).map(|_| small_rational(rng)).collect();
    let fin = (0..n).map(|_| small_rational(rng)).collect();
    Gfa::new(alphabet.clone(), ts, init, fin).unwrap()
}

/// Exact inverse by Gauss–Jordan elimination.
pub fn inverse(m: &Matrix<Rational>) -> Matrix<Rational> {
    let n = m.rows();
    let mut a: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row = m.row(i).to_vec();
            row.extend((0..n).map(|j| {
                if i == j {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero()).expect("invertible");
        a.swap(c, p);
        let piv = a[c][c].clone();
        for x in a[c].iter_mut() {
            *x = x.clone() / piv.clone();
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                let pivot_row = a[c].clone();
                for (x, y) in a[r].iter_mut().zip(pivot_row) {
                    *x = x.clone() - f.clone() * y;
                }
            }
        }
    }
    Matrix::from_fn(n, n, |i, j| a[i][n + j].clone())
}

/// Unit lower-triangular integer matrix times a random permutation.
pub fn random_invertible(n: usize, rng: &mut impl Rng) -> Matrix<Rational> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let l = Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => Rational::one(),
        std::cmp::Ordering::Greater => q(rng.gen_range(-2..=2), 1),
        std::cmp::Ordering::Less => Rational::zero(),
    });
    let p = Matrix::from_fn(n, n, |i, j| {
        if perm[i] == j {
            Rational::one()
        } else {
            Rational::zero()
        }
    });
    l.matmul(&p).unwrap()
}

/// `x ↦ T x`, `M ↦ T M T⁻¹`, `f ↦ f T⁻¹`: same value on every word.
pub fn similar(g: &Gfa<Rational>, t: &Matrix<Rational>) -> Gfa<Rational> {
    let ti = inverse(t);
    let ts = g
        .transitions()
        .iter()
        .map(|m| t.matmul(m).unwrap().matmul(&ti).unwrap())
        .collect();
    let init = t.mul_vec(g.initial()).unwrap();
    let fin = ti.vec_mul(g.final_vector()).unwrap();
    Gfa::new(g.alphabet().clone(), ts, init, fin).unwrap()
}

/// Adds an unreachable state with random outgoing weights and final value.
pub fn padded(g: &Gfa<Rational>, rng: &mut impl Rng) -> Gfa<Rational> {
    let n = g.states();
    let ts = g
        .transitions()
        .iter()
        .map(|m| {
            Matrix::from_fn(n + 1, n + 1, |i, j| {
                if i < n && j < n {
                    m[(i, j)].clone()
                } else if i == n && j < n {
                    Rational::zero()
                } else {
                    small_rational(rng)
                }
            })
        })
        .collect();
    let mut init = g.initial().to_vec();
    init.push(Rational::zero());
    let mut fin = g.final_vector().to_vec();
    fin.push(small_rational(rng));
    Gfa::new(g.alphabet().clone(), ts, init, fin).unwrap()
}

/// Changes one entry of one letter matrix.
pub fn perturbed(g: &Gfa<Rational>, rng: &mut impl Rng) -> Gfa<Rational> {
    let n = g.states();
    let mut ts = g.transitions().to_vec();
    let s = rng.gen_range(1..=g.alphabet().len());
    let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
    ts[s][(i, j)] = ts[s][(i, j)].clone() + q(1, rng.gen_range(1..=4));
    Gfa::new(
        g.alphabet().clone(),
        ts,
        g.initial().to_vec(),
        g.final_vector().to_vec(),
    )
    .unwrap()
}

/// First word in length-lexicographic order (length `≤ max_len`) on which
/// the two values differ.
pub fn first_difference(g1: &Gfa<Rational>, g2: &Gfa<Rational>, max_len: usize) -> Option<String> {
    g1.alphabet()
        .words_up_to(max_len)
        .into_iter()
        .find(|w| oracle_gfa_value(g1, w) != oracle_gfa_value(g2, w))
}

pub fn random_state(dim: usize, rng: &mut impl Rng) -> StateVector<f64> {
    let amps: Vec<C64> = (0..dim)
        .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    StateVector::normalized(amps).unwrap()
}

pub fn random_unitaries(n: usize, symbols: usize, rng: &mut impl Rng) -> Vec<Matrix<C64>> {
    (0..symbols).map(|_| random_unitary(n, rng)).collect()
}
