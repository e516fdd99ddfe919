//! Linearization of quantum automata and functional equivalence of
//! generalized automata.
//!
//! A density matrix `ρ` of an `n`-state machine is stored as `n²` real
//! coordinates: the diagonal `ρ[i,i]` first, then `Re ρ[i,j]` and
//! `Im ρ[i,j]` for each `i < j` in row-major order. Every superoperator is a
//! real-linear map on these coordinates.
//!
//! Equivalence is decided on the difference automaton `G₁ ⊖ G₂` by growing
//! a basis of its reachable vectors breadth-first; `¢` is folded into the
//! start vector and `$` into the final functional.

use std::collections::VecDeque;

use num_complex::Complex;

use crate::alphabet::Alphabet;
use crate::classical::{dot, Gfa};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::numeric::{Real, Scalar};
use crate::oneway::GeneralQfa;
use crate::quantum::{CMatrix, Superoperator};

/// Rank tolerance used by the float mode.
pub const NUMERIC_RANK_TOL: f64 = 1e-9;

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    // position of (i, j), i < j, among the strictly upper pairs
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Hermitian matrix corresponding to the coordinate basis vector `k`.
fn hermitian_basis<R: Real>(n: usize, k: usize) -> CMatrix<R> {
    let mut m = Matrix::zeros(n, n);
    if k < n {
        m[(k, k)] = Complex::new(R::one(), R::zero());
        return m;
    }
    let off = k - n;
    let (pair, imag) = (off / 2, off % 2 == 1);
    let (i, j) = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .nth(pair)
        .expect("coordinate in range");
    if imag {
        m[(i, j)] = Complex::new(R::zero(), R::one());
        m[(j, i)] = Complex::new(R::zero(), -R::one());
    } else {
        m[(i, j)] = Complex::new(R::one(), R::zero());
        m[(j, i)] = Complex::new(R::one(), R::zero());
    }
    m
}

/// Real coordinates of a Hermitian matrix.
pub fn vectorize<R: Real>(rho: &CMatrix<R>) -> Vec<R> {
    let n = rho.rows();
    let mut v = vec![R::zero(); n * n];
    for i in 0..n {
        v[i] = rho[(i, i)].re.clone();
        for j in i + 1..n {
            let p = pair_index(n, i, j);
            v[n + 2 * p] = rho[(i, j)].re.clone();
            v[n + 2 * p + 1] = rho[(i, j)].im.clone();
        }
    }
    v
}

/// Real `n² × n²` matrix acting on vectorized density matrices exactly as
/// the channel acts on `ρ`.
pub fn linearize_channel<R: Real>(e: &Superoperator<R>) -> Matrix<R> {
    let n = e.dim();
    let m = n * n;
    let mut out = Matrix::zeros(m, m);
    for k in 0..m {
        let image = e
            .apply_matrix(&hermitian_basis(n, k))
            .expect("matching dimension");
        for (row, x) in vectorize(&image).into_iter().enumerate() {
            out[(row, k)] = x;
        }
    }
    out
}

/// `n²`-state generalized automaton with the same acceptance function.
pub fn qfa_to_gfa<R: Real>(m: &GeneralQfa<R>) -> Gfa<R> {
    let n = m.states();
    let transitions = m.channels().iter().map(linearize_channel).collect();
    let mut initial = vec![R::zero(); n * n];
    initial[0] = R::one();
    let mut final_vec = vec![R::zero(); n * n];
    for &q in m.accepting() {
        final_vec[q] = R::one();
    }
    Gfa::new(m.alphabet().clone(), transitions, initial, final_vec)
        .expect("consistent linearization")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness<R: Real> {
    pub word: String,
    pub left: R,
    pub right: R,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceVerdict<R: Real> {
    pub equal: bool,
    /// Shortest distinguishing word when `equal` is false.
    pub witness: Option<Witness<R>>,
    /// True for a certified rational verdict, false for a toleranced one.
    pub exact: bool,
    /// Basis vectors added while spanning; never exceeds `dimension`.
    pub extensions: usize,
    /// Dimension of the difference automaton, `n₁ + n₂`.
    pub dimension: usize,
}

impl<R: Real> EquivalenceVerdict<R> {
    pub fn mode_label(&self) -> &'static str {
        if self.exact {
            "exact"
        } else {
            "numeric"
        }
    }
}

/// Row-echelon basis with pivots normalized to one.
struct EchelonBasis<R: Real> {
    rows: Vec<(usize, Vec<R>)>,
    tol: f64,
}

impl<R: Real> EchelonBasis<R> {
    fn reduce(&self, v: &mut [R]) {
        for (p, b) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let c = v[*p].clone();
            for (x, y) in v.iter_mut().zip(b) {
                if !y.is_zero() {
                    *x = x.clone() - c.clone() * y.clone();
                }
            }
        }
    }

    /// Adds `v` if it is independent of the current span.
    fn insert(&mut self, mut v: Vec<R>) -> bool {
        let scale = v.iter().map(Scalar::magnitude).fold(1.0, f64::max);
        self.reduce(&mut v);
        let pivot = if R::EXACT {
            v.iter().position(|x| !x.is_zero())
        } else {
            let (i, m) = v
                .iter()
                .enumerate()
                .map(|(i, x)| (i, x.magnitude()))
                .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
            (m > self.tol * scale).then_some(i)
        };
        let Some(p) = pivot else { return false };
        let inv = R::one() / v[p].clone();
        let v: Vec<R> = v.into_iter().map(|x| x * inv.clone()).collect();
        for (_, b) in &mut self.rows {
            if !b[p].is_zero() {
                let c = b[p].clone();
                for (x, y) in b.iter_mut().zip(&v) {
                    *x = x.clone() - c.clone() * y.clone();
                }
            }
        }
        self.rows.push((p, v));
        true
    }
}

/// Decides `f_{G₁}(w) = f_{G₂}(w)` for all words.
pub fn gfa_equiv<R: Real>(g1: &Gfa<R>, g2: &Gfa<R>) -> Result<EquivalenceVerdict<R>> {
    gfa_equiv_with_tol(g1, g2, NUMERIC_RANK_TOL)
}

pub fn gfa_equiv_with_tol<R: Real>(
    g1: &Gfa<R>,
    g2: &Gfa<R>,
    tol: f64,
) -> Result<EquivalenceVerdict<R>> {
    let alphabet = check_alphabets(g1.alphabet(), g2.alphabet())?;
    let (n1, n2) = (g1.states(), g2.states());
    let dim = n1 + n2;

    let end = alphabet.right_end();
    let f1 = g1.transitions()[end].vec_mul(g1.final_vector())?;
    let f2 = g2.transitions()[end].vec_mul(g2.final_vector())?;
    let functional: Vec<R> = f1.into_iter().chain(f2.into_iter().map(|x| -x)).collect();

    let step = |letter: usize, v: &[R]| -> Vec<R> {
        let a = g1.transitions()[letter].mul_vec(&v[..n1]).expect("shape");
        let b = g2.transitions()[letter].mul_vec(&v[n1..]).expect("shape");
        a.into_iter().chain(b).collect()
    };
    let start: Vec<R> = g1
        .state_after(&[])
        .into_iter()
        .chain(g2.state_after(&[]))
        .collect();

    let mut basis = EchelonBasis {
        rows: Vec::new(),
        tol,
    };
    let mut queue = VecDeque::from([(Vec::<usize>::new(), start)]);
    let mut witness = None;
    while let Some((word, v)) = queue.pop_front() {
        let diff = dot(&functional, &v);
        let scale = functional
            .iter()
            .chain(&v)
            .map(Scalar::magnitude)
            .fold(1.0, f64::max);
        let differs = if R::EXACT {
            !diff.is_zero()
        } else {
            diff.magnitude() > tol * scale
        };
        if differs {
            let text: String = word.iter().map(|&s| alphabet.letters()[s - 1]).collect();
            witness = Some(Witness {
                left: g1.value(&text)?,
                right: g2.value(&text)?,
                word: text,
            });
            break;
        }
        if basis.insert(v.clone()) {
            assert!(
                basis.rows.len() <= dim,
                "span exceeded the automaton dimension"
            );
            for letter in 1..=alphabet.len() {
                let mut w = word.clone();
                w.push(letter);
                let next = step(letter, &v);
                queue.push_back((w, next));
            }
        }
    }
    Ok(EquivalenceVerdict {
        equal: witness.is_none(),
        witness,
        exact: R::EXACT,
        extensions: basis.rows.len(),
        dimension: dim,
    })
}

/// Equivalence of two general QFAs through their linearizations.
pub fn qfa_equiv<R: Real>(m1: &GeneralQfa<R>, m2: &GeneralQfa<R>) -> Result<EquivalenceVerdict<R>> {
    gfa_equiv(&qfa_to_gfa(m1), &qfa_to_gfa(m2))
}

fn check_alphabets(a: &Alphabet, b: &Alphabet) -> Result<Alphabet> {
    if a != b {
        return Err(Error::InvalidParameter(format!(
            "alphabets differ: {:?} versus {:?}",
            a.letters(),
            b.letters()
        )));
    }
    Ok(a.clone())
}

/// Value-equality on every word of length `<= max_len`, by enumeration.
/// Returns the first (length-lexicographic) word on which the values differ.
pub fn brute_force_difference<R: Real>(
    g1: &Gfa<R>,
    g2: &Gfa<R>,
    max_len: usize,
    tol: f64,
) -> Result<Option<String>> {
    check_alphabets(g1.alphabet(), g2.alphabet())?;
    for w in g1.alphabet().words_up_to(max_len) {
        let d = g1.value(&w)? - g2.value(&w)?;
        if !d.is_zero_within(tol) {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{Rational, C64};
    use crate::oneway::build_modp_2state;
    use crate::quantum::{apply_superoperator, random_channel, DensityMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pair_indexing_is_dense() {
        let n = 4;
        let mut seen = vec![];
        for i in 0..n {
            for j in i + 1..n {
                seen.push(pair_index(n, i, j));
            }
        }
        assert_eq!(seen, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn linearization_commutes_with_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3 {
            let e = random_channel(n, 2, &mut rng);
            let psi = crate::quantum::random_unitary(n, &mut rng);
            let col: Vec<C64> = (0..n).map(|i| psi[(i, 0)]).collect();
            let rho = DensityMatrix::new(crate::quantum::outer(&col, &col), 1e-12).unwrap();
            let direct = vectorize(apply_superoperator(&e, &rho).unwrap().matrix());
            let via = linearize_channel(&e)
                .mul_vec(&vectorize(rho.matrix()))
                .unwrap();
            for (a, b) in direct.iter().zip(&via) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_channel_linearizes_to_identity() {
        let e = Superoperator::<Rational>::identity(3);
        assert_eq!(linearize_channel(&e), Matrix::identity(9));
    }

    #[test]
    fn modp_gfa_values() {
        let m = GeneralQfa::from_mcqfa(&build_modp_2state(5, 1).unwrap());
        let g = qfa_to_gfa(&m);
        assert_eq!(g.states(), 4);
        for j in 0..=20u64 {
            let w = "a".repeat(j as usize);
            let expect = crate::oneway::modp_2state_closed_form(5, 1, j);
            assert!((g.value(&w).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn self_equivalence() {
        let m = GeneralQfa::from_mcqfa(&build_modp_2state(5, 2).unwrap());
        let v = qfa_equiv(&m, &m).unwrap();
        assert!(v.equal);
        assert!(!v.exact);
        assert!(v.extensions <= v.dimension);
    }

    #[test]
    fn alphabet_mismatch_is_an_error() {
        let a = qfa_to_gfa(&GeneralQfa::from_mcqfa(&build_modp_2state(5, 1).unwrap()));
        let b = qfa_to_gfa(&GeneralQfa::from_mcqfa(
            &crate::oneway::build_neq_nqfa(1.0).unwrap(),
        ));
        assert!(gfa_equiv(&a, &b).is_err());
    }
}
