//! One-way quantum automata: measure-once (MCQFA), measure-many (KWQFA) and
//! the general superoperator model, plus the named constructions.

use std::f64::consts::PI;

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::Alphabet;
use crate::classical::{check_indices, Pfa};
use crate::error::{dim_err, Error, Result};
use crate::matrix::Matrix;
use crate::numeric::{real, Real, C64};
use crate::quantum::{
    norm_sqr, unitary_defect, CMatrix, DensityMatrix, KrausOperator, StateVector, Superoperator,
};

fn check_unitaries<R: Real>(
    alphabet: &Alphabet,
    unitaries: &[CMatrix<R>],
    tol: f64,
) -> Result<usize> {
    if unitaries.len() != alphabet.symbol_count() {
        return dim_err(format!(
            "{} unitaries for {} tape symbols",
            unitaries.len(),
            alphabet.symbol_count()
        ));
    }
    let n = unitaries[0].rows();
    for (s, u) in unitaries.iter().enumerate() {
        if u.rows() != n || u.cols() != n {
            return dim_err(format!(
                "transition '{}' is {}x{}, expected {n}x{n}",
                alphabet.symbol_key(s),
                u.rows(),
                u.cols()
            ));
        }
        let defect = unitary_defect(u)?;
        if defect > tol {
            return Err(Error::Validation {
                what: format!("unitarity of transition '{}'", alphabet.symbol_key(s)),
                defect,
            });
        }
    }
    Ok(n)
}

/// Measure-once automaton: a unitary per tape symbol and one measurement
/// after `$`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mcqfa<R: Real> {
    alphabet: Alphabet,
    unitaries: Vec<CMatrix<R>>,
    accepting: Vec<usize>,
}

impl<R: Real> Mcqfa<R> {
    pub fn new(
        alphabet: Alphabet,
        unitaries: Vec<CMatrix<R>>,
        accepting: Vec<usize>,
        tol: f64,
    ) -> Result<Self> {
        let n = check_unitaries(&alphabet, &unitaries, tol)?;
        check_indices(&accepting, n)?;
        Ok(Mcqfa {
            alphabet,
            unitaries,
            accepting,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn states(&self) -> usize {
        self.unitaries[0].rows()
    }

    pub fn unitaries(&self) -> &[CMatrix<R>] {
        &self.unitaries
    }

    pub fn accepting(&self) -> &[usize] {
        &self.accepting
    }

    /// State after each symbol of `¢ w $` (the initial `|q₁⟩` first).
    pub fn trajectory(&self, word: &str) -> Result<Vec<StateVector<R>>> {
        let tape = self.alphabet.tape(word)?;
        let mut psi = StateVector::basis(self.states(), 0);
        let mut out = vec![psi.clone()];
        for s in tape {
            psi = psi.apply(&self.unitaries[s])?;
            out.push(psi.clone());
        }
        Ok(out)
    }

    pub fn accept_prob(&self, word: &str) -> Result<R> {
        let last = self.trajectory(word)?.pop().expect("nonempty trajectory");
        Ok(self
            .accepting
            .iter()
            .fold(R::zero(), |acc, &q| acc + last.amplitudes()[q].norm_sqr()))
    }
}

/// Probability mass bookkeeping of a measure-many run.
#[derive(Clone, Debug, PartialEq)]
pub struct HaltingLedger<R: Real> {
    pub accept: R,
    pub reject: R,
    /// Unnormalized nonhalting component.
    pub live: Vec<Complex<R>>,
}

impl<R: Real> HaltingLedger<R> {
    pub fn live_mass(&self) -> R {
        norm_sqr(&self.live)
    }

    /// `p_acc + p_rej + ‖live‖²`, which stays 1 for a valid machine.
    pub fn total(&self) -> R {
        self.accept.clone() + self.reject.clone() + self.live_mass()
    }
}

/// Measure-many automaton: the partial measurement `Q_a / Q_r / Q_n` follows
/// every symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct Kwqfa<R: Real> {
    alphabet: Alphabet,
    unitaries: Vec<CMatrix<R>>,
    accepting: Vec<usize>,
    rejecting: Vec<usize>,
}

impl<R: Real> Kwqfa<R> {
    /// States outside `accepting ∪ rejecting` are nonhalting.
    pub fn new(
        alphabet: Alphabet,
        unitaries: Vec<CMatrix<R>>,
        accepting: Vec<usize>,
        rejecting: Vec<usize>,
        tol: f64,
    ) -> Result<Self> {
        let n = check_unitaries(&alphabet, &unitaries, tol)?;
        check_indices(&accepting, n)?;
        check_indices(&rejecting, n)?;
        if let Some(q) = accepting.iter().find(|q| rejecting.contains(q)) {
            return Err(Error::InvalidParameter(format!(
                "state {q} is both accepting and rejecting"
            )));
        }
        Ok(Kwqfa {
            alphabet,
            unitaries,
            accepting,
            rejecting,
        })
    }

    /// Embeds a measure-once machine: `2n` states, the second copy halting.
    /// Letters act on the first copy only; `$` applies `U_$` and then swaps
    /// each state into its halting twin, which accepts iff the original state
    /// is accepting.
    pub fn from_mcqfa(m: &Mcqfa<R>) -> Self {
        let n = m.states();
        let lift = |u: &CMatrix<R>| u.direct_sum(&Matrix::identity(n));
        let mut unitaries: Vec<_> = m.unitaries.iter().map(lift).collect();
        let mut swap: CMatrix<R> = Matrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            swap[(i + n, i)] = Complex::one();
            swap[(i, i + n)] = Complex::one();
        }
        let end = m.alphabet.right_end();
        unitaries[end] = swap.matmul(&unitaries[end]).expect("square");
        let accepting = m.accepting.iter().map(|q| q + n).collect();
        let rejecting = (0..n)
            .filter(|q| !m.accepting.contains(q))
            .map(|q| q + n)
            .collect();
        Kwqfa {
            alphabet: m.alphabet.clone(),
            unitaries,
            accepting,
            rejecting,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn states(&self) -> usize {
        self.unitaries[0].rows()
    }

    pub fn unitaries(&self) -> &[CMatrix<R>] {
        &self.unitaries
    }

    pub fn accepting(&self) -> &[usize] {
        &self.accepting
    }

    pub fn rejecting(&self) -> &[usize] {
        &self.rejecting
    }

    /// Ledger after every symbol of `¢ w $`; the final entry still holds the
    /// end-of-tape nonhalting mass in `live`.
    pub fn ledger_trace(&self, word: &str) -> Result<Vec<HaltingLedger<R>>> {
        let tape = self.alphabet.tape(word)?;
        let mut ledger = HaltingLedger {
            accept: R::zero(),
            reject: R::zero(),
            live: StateVector::<R>::basis(self.states(), 0)
                .amplitudes()
                .to_vec(),
        };
        let mut out = Vec::with_capacity(tape.len());
        for s in tape {
            let mut next = self.unitaries[s].mul_vec(&ledger.live)?;
            for &q in &self.accepting {
                ledger.accept = ledger.accept.clone() + next[q].norm_sqr();
                next[q] = Complex::zero();
            }
            for &q in &self.rejecting {
                ledger.reject = ledger.reject.clone() + next[q].norm_sqr();
                next[q] = Complex::zero();
            }
            ledger.live = next;
            out.push(ledger.clone());
        }
        Ok(out)
    }

    /// `(p_acc, p_rej)`; nonhalting mass left after `$` counts as rejection.
    pub fn accept_reject(&self, word: &str) -> Result<(R, R)> {
        let last = self.ledger_trace(word)?.pop().expect("tape is nonempty");
        let rej = last.reject.clone() + last.live_mass();
        Ok((last.accept, rej))
    }

    /// Halting accept and reject mass of a single pass, with the end-of-tape
    /// residue kept separate.
    pub fn pass_masses(&self, word: &str) -> Result<(R, R, R)> {
        let last = self.ledger_trace(word)?.pop().expect("tape is nonempty");
        let live = last.live_mass();
        Ok((last.accept, last.reject, live))
    }
}

/// Acceptance probability of the machine run with restarts: the residue
/// after `$` starts a fresh pass. Equals `A / (A + R)` for per-pass halting
/// masses `A`, `R`.
pub fn restart_accept_prob<R: Real>(m: &Kwqfa<R>, word: &str, tol: f64) -> Result<R> {
    let (a, r, _) = m.pass_masses(word)?;
    restart_from_masses(a, r, tol)
}

pub fn restart_from_masses<R: Real>(accept: R, reject: R, tol: f64) -> Result<R> {
    let halt = accept.clone() + reject;
    if halt.is_zero_within(tol) || halt <= R::zero() {
        return Err(Error::NonTermination(
            "no halting mass in a single pass".into(),
        ));
    }
    Ok(accept / halt)
}

/// General one-way QFA: a superoperator per tape symbol, initial state
/// `|q₁⟩⟨q₁|`, final measurement in the computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralQfa<R: Real> {
    alphabet: Alphabet,
    channels: Vec<Superoperator<R>>,
    accepting: Vec<usize>,
}

impl<R: Real> GeneralQfa<R> {
    pub fn new(
        alphabet: Alphabet,
        channels: Vec<Superoperator<R>>,
        accepting: Vec<usize>,
        tol: f64,
    ) -> Result<Self> {
        if channels.len() != alphabet.symbol_count() {
            return dim_err(format!(
                "{} channels for {} tape symbols",
                channels.len(),
                alphabet.symbol_count()
            ));
        }
        let n = channels[0].dim();
        for (s, e) in channels.iter().enumerate() {
            if e.dim() != n {
                return dim_err(format!(
                    "channel '{}' has dimension {}, expected {n}",
                    alphabet.symbol_key(s),
                    e.dim()
                ));
            }
            let defect = e.completeness_defect();
            if defect > tol {
                return Err(Error::Validation {
                    what: format!("Kraus completeness of '{}'", alphabet.symbol_key(s)),
                    defect,
                });
            }
        }
        check_indices(&accepting, n)?;
        Ok(GeneralQfa {
            alphabet,
            channels,
            accepting,
        })
    }

    pub fn from_mcqfa(m: &Mcqfa<R>) -> Self {
        GeneralQfa {
            alphabet: m.alphabet.clone(),
            channels: m
                .unitaries
                .iter()
                .cloned()
                .map(Superoperator::unitary)
                .collect(),
            accepting: m.accepting.clone(),
        }
    }

    /// Probabilistic automaton as a quantum one with the same state count:
    /// each transition `A_σ` becomes the Kraus set
    /// `{ √A_σ[j,i] |q_j⟩⟨q_i| : A_σ[j,i] > 0 }`.
    pub fn from_pfa(p: &Pfa<R>) -> Self {
        let n = p.states();
        let channels = p
            .transitions()
            .iter()
            .map(|a| {
                let mut ops = Vec::new();
                for j in 0..n {
                    for i in 0..n {
                        if a[(j, i)] > R::zero() {
                            ops.push(KrausOperator::weighted(
                                a[(j, i)].clone(),
                                Matrix::unit(n, j, i),
                            ));
                        }
                    }
                }
                Superoperator::new(ops).expect("square operators of one dimension")
            })
            .collect();
        GeneralQfa {
            alphabet: p.alphabet().clone(),
            channels,
            accepting: p.accepting().to_vec(),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn states(&self) -> usize {
        self.channels[0].dim()
    }

    pub fn channels(&self) -> &[Superoperator<R>] {
        &self.channels
    }

    pub fn accepting(&self) -> &[usize] {
        &self.accepting
    }

    pub fn final_density(&self, word: &str) -> Result<DensityMatrix<R>> {
        let tape = self.alphabet.tape(word)?;
        let mut rho = DensityMatrix::pure(self.states(), 0);
        for s in tape {
            rho = crate::quantum::apply_superoperator(&self.channels[s], &rho)?;
        }
        Ok(rho)
    }

    pub fn accept_prob(&self, word: &str) -> Result<R> {
        let rho = self.final_density(word)?;
        Ok(self
            .accepting
            .iter()
            .fold(R::zero(), |acc, &q| acc + rho.population(q)))
    }
}

/// Real rotation in the `q₁`–`q₂` plane: `|q₁⟩ ↦ cos φ|q₁⟩ + sin φ|q₂⟩`.
pub fn rotation(angle: f64) -> Matrix<C64> {
    let (s, c) = angle.sin_cos();
    Matrix::from_rows(vec![vec![real(c), real(-s)], vec![real(s), real(c)]]).expect("2x2")
}

/// Angle `2πk/p` reduced into `(-π, π]`, so that `k` and `p - k` give
/// bitwise mirror-image matrices.
fn residue_angle(p: u64, k: u64) -> f64 {
    let m = k % p;
    if 2 * m > p {
        -2.0 * PI * (p - m) as f64 / p as f64
    } else {
        2.0 * PI * m as f64 / p as f64
    }
}

/// Two-state machine rotating by `2πk/p` per `a`, accepting in `q₁`; accepts
/// `a^j` with probability `cos²(2πjk/p)`.
pub fn build_modp_2state(p: u64, k: u64) -> Result<Mcqfa<f64>> {
    if p <= 2 || p.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "p = {p} must be odd and greater than 2"
        )));
    }
    if k == 0 || k >= p {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must lie in 1..{p}"
        )));
    }
    let id = Matrix::identity(2);
    Mcqfa::new(
        Alphabet::from_letters("a"),
        vec![id.clone(), rotation(residue_angle(p, k)), id],
        vec![0],
        1e-12,
    )
}

/// Closed-form acceptance of `a^j` by the two-state machine.
pub fn modp_2state_closed_form(p: u64, k: u64, j: u64) -> f64 {
    (2.0 * PI * (j as f64) * (k as f64) / p as f64)
        .cos()
        .powi(2)
}

/// Result of the logarithmic-size MOD_p construction.
#[derive(Clone, Debug)]
pub struct LogstateMachine {
    pub machine: Mcqfa<f64>,
    pub multipliers: Vec<u64>,
    /// Number of rotation blocks `d`; the machine has `2d` states.
    pub blocks: usize,
    /// Seeds rejected before `seed_used` passed the error check.
    pub redraws: u64,
    pub seed_used: u64,
    /// Largest closed-form acceptance over `j = 1..p-1`.
    pub max_nonmember_accept: f64,
}

pub fn is_prime(p: u64) -> bool {
    p >= 2
        && (2..)
            .take_while(|d| d * d <= p)
            .all(|d| !p.is_multiple_of(d))
}

/// `d = ⌈2·log₂(2p/ε)⌉`.
pub fn logstate_blocks(p: u64, eps: f64) -> usize {
    (2.0 * (2.0 * p as f64 / eps).log2()).ceil() as usize
}

/// Acceptance of `a^j` for multipliers `k_i`: `((1/d) Σ cos(2πjk_i/p))²`.
pub fn logstate_closed_form(p: u64, multipliers: &[u64], j: u64) -> f64 {
    let d = multipliers.len() as f64;
    let s: f64 = multipliers
        .iter()
        .map(|&k| (2.0 * PI * ((j * k) % p) as f64 / p as f64).cos())
        .sum();
    (s / d).powi(2)
}

const MAX_REDRAWS: u64 = 100_000;

/// MOD_p recognizer with `2d` states and one-sided error `eps`.
///
/// Multipliers are drawn uniformly from `1..p` with a generator seeded by
/// `seed`; a draw whose worst nonmember acceptance exceeds `eps` is
/// discarded and the next seed is tried.
pub fn build_modp_logstate(p: u64, eps: f64, seed: u64) -> Result<LogstateMachine> {
    if !is_prime(p) {
        return Err(Error::InvalidParameter(format!("p = {p} is not prime")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps} outside (0, 1)"
        )));
    }
    let d = logstate_blocks(p, eps);
    for redraws in 0..MAX_REDRAWS {
        let seed_used = seed.wrapping_add(redraws);
        let mut rng = ChaCha8Rng::seed_from_u64(seed_used);
        let ks: Vec<u64> = (0..d).map(|_| rng.gen_range(1..p)).collect();
        let worst = (1..p)
            .map(|j| logstate_closed_form(p, &ks, j))
            .fold(0.0, f64::max);
        if worst <= eps {
            let machine = logstate_machine(p, &ks)?;
            return Ok(LogstateMachine {
                machine,
                multipliers: ks,
                blocks: d,
                redraws,
                seed_used,
                max_nonmember_accept: worst,
            });
        }
    }
    Err(Error::NonTermination(format!(
        "no multiplier set within {MAX_REDRAWS} draws"
    )))
}

/// Block machine for given multipliers. State `2i` is `q_{i+1,1}`, state
/// `2i+1` is `q_{i+1,2}`; `U_¢ = U_$` is the Householder reflection swapping
/// `|q_{1,1}⟩` and the uniform superposition of the `q_{i,1}`.
pub fn logstate_machine(p: u64, multipliers: &[u64]) -> Result<Mcqfa<f64>> {
    let d = multipliers.len();
    if d == 0 {
        return Err(Error::InvalidParameter(
            "at least one multiplier required".into(),
        ));
    }
    let n = 2 * d;
    let mut ua = Matrix::<C64>::zeros(n, n);
    for (i, &k) in multipliers.iter().enumerate() {
        let r = rotation(residue_angle(p, k));
        for a in 0..2 {
            for b in 0..2 {
                ua[(2 * i + a, 2 * i + b)] = r[(a, b)];
            }
        }
    }
    let mut v = vec![0.0; n];
    let amp = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        v[2 * i] = -amp;
    }
    v[0] += 1.0;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let reflect = if vv == 0.0 {
        Matrix::identity(n)
    } else {
        Matrix::from_fn(n, n, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            real(delta - 2.0 * v[i] * v[j] / vv)
        })
    };
    Mcqfa::new(
        Alphabet::from_letters("a"),
        vec![reflect.clone(), ua, reflect],
        vec![0],
        1e-10,
    )
}

/// Positive one-sided recognizer of `{ w : |w|_a ≠ |w|_b }`: rotate by
/// `+θ` on `a` and `-θ` on `b`, accept in `q₂`.
pub fn build_neq_nqfa(theta: f64) -> Result<Mcqfa<f64>> {
    if !theta.is_finite() {
        return Err(Error::InvalidParameter("theta must be finite".into()));
    }
    let id = Matrix::identity(2);
    Mcqfa::new(
        Alphabet::from_letters("ab"),
        vec![id.clone(), rotation(theta), rotation(-theta), id],
        vec![1],
        1e-12,
    )
}

pub fn default_neq_angle() -> f64 {
    2f64.sqrt() * PI
}
