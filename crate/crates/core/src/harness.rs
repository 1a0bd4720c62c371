//! Randomized generators, an independent determinant oracle, and the named
//! property suites that exercise every algebraic identity the library rests
//! on. Every check is exact pass/fail; there is no tolerance anywhere.
//!
//! Trials are reproducible: each derives its own generator from the
//! configured seed and its trial index, so results do not depend on
//! execution order and a failing trial can be replayed from the printed
//! seed alone.

use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::elementary::{eval_factors, push_type3_left, ElementaryMatrix};
use crate::error::{Error, Result};
use crate::factor::{
    entry_conditions, factor_2x2, factor_3x3, factor_star, is_factorizable_3x3, normal_form,
};
use crate::matrix::{Matrix, Mode, SingularityClass};
use crate::scalar::Scalar;

/// Deterministic generator parameters. Identical configurations yield
/// identical streams.
#[derive(Clone, Debug)]
pub struct GeneratorConfig {
    /// Matrix dimension.
    pub n: usize,
    /// Probability that an entry is finite.
    pub density: f64,
    /// Inclusive bounds for generated numerators.
    pub value_range: (i64, i64),
    /// Probability that a finite entry is ghost.
    pub ghost_rate: f64,
    /// Base seed; trials derive their own streams from it.
    pub seed: u64,
}

impl GeneratorConfig {
    /// A tie-friendly default: dense small integers with occasional halves
    /// and a modest ghost rate.
    pub fn new(n: usize, seed: u64) -> Self {
        GeneratorConfig {
            n,
            density: 0.85,
            value_range: (-8, 8),
            ghost_rate: 0.2,
            seed,
        }
    }
}

/// A small splitmix64 stream; self-contained so that generated data is
/// bit-stable forever.
#[derive(Clone, Debug)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    /// The stream for one trial of a suite.
    pub fn for_trial(seed: u64, trial: u64) -> Self {
        let mut rng = Rng(seed ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        rng.next_u64();
        rng
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn chance(&mut self, p: f64) -> bool {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) < p
    }

    fn range(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo) as u64 + 1;
        lo + (self.next_u64() % span) as i64
    }

    fn index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

fn gen_scalar(cfg: &GeneratorConfig, rng: &mut Rng) -> Scalar {
    if !rng.chance(cfg.density) {
        return Scalar::NegInf;
    }
    let numer = rng.range(cfg.value_range.0, cfg.value_range.1);
    let denom = if rng.next_u64().is_multiple_of(4) {
        2
    } else {
        1
    };
    let value = BigRational::new(BigInt::from(numer), BigInt::from(denom));
    if rng.chance(cfg.ghost_rate) {
        Scalar::Ghost(value)
    } else {
        Scalar::Tangible(value)
    }
}

/// A matrix with independently sampled entries.
pub fn gen_matrix(cfg: &GeneratorConfig, rng: &mut Rng) -> Matrix {
    Matrix::from_fn(cfg.n, |_, _| gen_scalar(cfg, rng))
}

/// An invertible matrix: a random permutation track of tangible values.
pub fn gen_invertible(cfg: &GeneratorConfig, rng: &mut Rng) -> Matrix {
    let n = cfg.n;
    let mut images: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        images.swap(i, rng.index(i + 1));
    }
    let mut m = Matrix::from_fn(n, |_, _| Scalar::NegInf);
    for (i, &j) in images.iter().enumerate() {
        let numer = rng.range(cfg.value_range.0, cfg.value_range.1);
        *m.at_mut(i, j) = Scalar::int(numer);
    }
    m
}

const REJECTION_BUDGET: usize = 500;

/// A matrix in normal form: rejection-samples a not strictly singular
/// matrix, relocates and normalizes a dominant track, and pins the diagonal
/// to the exact `1` (normalizing a ghost track entry leaves a ghost `1`,
/// which the value structure ignores).
pub fn gen_normal_form(cfg: &GeneratorConfig, rng: &mut Rng) -> Result<Matrix> {
    for _ in 0..REJECTION_BUDGET {
        let m = gen_matrix(cfg, rng);
        if m.determinant().is_neg_inf() {
            continue;
        }
        let report = m.dominant_tracks();
        let pi = report.permutations[0].clone();
        let pi_inv = pi.inverse();
        let mut inv_track = Vec::with_capacity(cfg.n);
        for k in 0..cfg.n {
            inv_track.push(m.at(k, pi.apply(k)).project().inv()?);
        }
        let mut abar = Matrix::from_fn(cfg.n, |i, j| {
            let k = pi_inv.apply(i);
            m.at(k, j) * &inv_track[k]
        });
        for i in 0..cfg.n {
            *abar.at_mut(i, i) = Scalar::one();
        }
        debug_assert!(abar.is_normal_form());
        return Ok(abar);
    }
    Err(Error::GeneratorExhausted)
}

fn gen_nonsingular(cfg: &GeneratorConfig, rng: &mut Rng) -> Result<Matrix> {
    for _ in 0..REJECTION_BUDGET {
        let m = gen_matrix(cfg, rng);
        if m.classify() == SingularityClass::NonSingular {
            return Ok(m);
        }
    }
    Err(Error::GeneratorExhausted)
}

fn gen_not_strictly_singular(cfg: &GeneratorConfig, rng: &mut Rng) -> Result<Matrix> {
    for _ in 0..REJECTION_BUDGET {
        let m = gen_matrix(cfg, rng);
        if !m.determinant().is_neg_inf() {
            return Ok(m);
        }
    }
    Err(Error::GeneratorExhausted)
}

/// A random elementary factor for the rewrite suite.
fn gen_elementary(cfg: &GeneratorConfig, rng: &mut Rng) -> Result<ElementaryMatrix> {
    let n = cfg.n.max(2);
    let i = rng.index(n) + 1;
    let mut j = rng.index(n) + 1;
    while j == i {
        j = rng.index(n) + 1;
    }
    let k = Scalar::int(rng.range(cfg.value_range.0, cfg.value_range.1));
    match rng.next_u64() % 3 {
        0 => ElementaryMatrix::swap(n, i, j),
        1 => ElementaryMatrix::scale(n, i, k),
        _ => ElementaryMatrix::add_multiple(n, i, j, k),
    }
}

/// The independent determinant oracle: direct permutation enumeration from
/// the raw definitions, sharing no code with the production determinant.
/// Permutations come from Heap's algorithm rather than lexicographic
/// stepping, and track folding is done on bare rationals with a ghost flag.
pub fn oracle_determinant(a: &Matrix) -> Result<Scalar> {
    const MAX: usize = 8;
    let n = a.dim();
    if n > MAX {
        return Err(Error::DimensionTooLarge { n, max: MAX });
    }
    // Raw cell table: value and ghostness, None for -inf.
    let mut cells: Vec<Vec<Option<(BigRational, bool)>>> = Vec::with_capacity(n);
    for i in 1..=n {
        let mut row = Vec::with_capacity(n);
        for j in 1..=n {
            row.push(match a.get(i, j) {
                Scalar::NegInf => None,
                Scalar::Tangible(v) => Some((v.clone(), false)),
                Scalar::Ghost(v) => Some((v.clone(), true)),
            });
        }
        cells.push(row);
    }

    let mut best: Option<(BigRational, bool)> = None;
    let mut consider = |perm: &[usize]| {
        let mut sum = BigRational::from_integer(BigInt::from(0));
        let mut ghost = false;
        for (i, &j) in perm.iter().enumerate() {
            match &cells[i][j] {
                None => return,
                Some((v, g)) => {
                    sum += v;
                    ghost |= *g;
                }
            }
        }
        match &mut best {
            None => best = Some((sum, ghost)),
            Some((top, top_ghost)) => {
                if sum > *top {
                    *top = sum;
                    *top_ghost = ghost;
                } else if sum == *top {
                    *top_ghost = true;
                }
            }
        }
    };

    // Heap's algorithm, iterative form.
    let mut perm: Vec<usize> = (0..n).collect();
    let mut counters = vec![0usize; n];
    consider(&perm);
    let mut i = 0;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            consider(&perm);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }

    Ok(match best {
        None => Scalar::NegInf,
        Some((v, true)) => Scalar::Ghost(v),
        Some((v, false)) => Scalar::Tangible(v),
    })
}

/// One failing trial, with enough context to reproduce and inspect it.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub trial: u64,
    pub description: String,
    /// Labelled matrices serialized in the matrix file format.
    pub matrices: Vec<(String, Matrix)>,
}

/// The outcome of a suite run.
#[derive(Clone, Debug)]
pub struct PropertyReport {
    pub name: String,
    pub trials: u64,
    pub seed: u64,
    pub failures: Vec<Counterexample>,
    pub elapsed: Duration,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "PROP {} trials={} failures={} seed={}",
            self.name,
            self.trials,
            self.failures.len(),
            self.seed
        )?;
        for cx in &self.failures {
            writeln!(f, "  trial {}: {}", cx.trial, cx.description)?;
            for (label, m) in &cx.matrices {
                writeln!(f, "  {label}:")?;
                for line in m.to_string().lines() {
                    writeln!(f, "    {line}")?;
                }
            }
        }
        Ok(())
    }
}

/// Every registered suite name.
pub const SUITE_NAMES: &[&str] = &[
    "det-mult-gs",
    "thm5.5i",
    "thm5.5ii",
    "prop5.6",
    "lemma5.4",
    "lemma5.7i",
    "lemma5.7ii",
    "lemma5.7iii",
    "lemma5.8",
    "claim6.1",
    "cor6.2",
    "lemma6.7",
    "claim3.1",
    "claim4.2",
    "lemma6.5",
    "ex2.9b",
    "oracle-det",
];

/// Runs a registered suite for `trials` independent trials.
pub fn run_property(name: &str, cfg: &GeneratorConfig, trials: u64) -> Result<PropertyReport> {
    if !SUITE_NAMES.contains(&name) {
        return Err(Error::UnknownProperty(name.to_string()));
    }
    let start = Instant::now();
    let mut failures = Vec::new();
    for trial in 0..trials {
        let mut rng = Rng::for_trial(cfg.seed, trial);
        match run_trial(name, cfg, &mut rng) {
            Ok(()) => {}
            Err(TrialFailure {
                description,
                matrices,
            }) => failures.push(Counterexample {
                trial,
                description,
                matrices,
            }),
        }
    }
    Ok(PropertyReport {
        name: name.to_string(),
        trials,
        seed: cfg.seed,
        failures,
        elapsed: start.elapsed(),
    })
}

struct TrialFailure {
    description: String,
    matrices: Vec<(String, Matrix)>,
}

type Trial = std::result::Result<(), TrialFailure>;

fn fail(description: impl Into<String>, matrices: Vec<(&str, &Matrix)>) -> Trial {
    Err(TrialFailure {
        description: description.into(),
        matrices: matrices
            .into_iter()
            .map(|(l, m)| (l.to_string(), m.clone()))
            .collect(),
    })
}

fn lift(result: Result<()>, context: &str) -> Trial {
    result.map_err(|e| TrialFailure {
        description: format!("{context}: {e}"),
        matrices: Vec::new(),
    })
}

fn run_trial(name: &str, cfg: &GeneratorConfig, rng: &mut Rng) -> Trial {
    match name {
        "det-mult-gs" => det_mult_gs(cfg, rng),
        "thm5.5i" => adjoint_product_determinant(cfg, rng),
        "thm5.5ii" => adjoint_determinant_power(cfg, rng),
        "prop5.6" => adjoint_antimultiplicative(cfg, rng),
        "lemma5.4" => quasi_identity_shape(cfg, rng),
        "lemma5.7i" => invertible_quasi_inverse(cfg, rng),
        "lemma5.7ii" => quasi_inverse_of_shifted(cfg, rng),
        "lemma5.7iii" => quasi_inverse_through_normal_form(cfg, rng),
        "lemma5.8" => three_by_three_entry_conditions(cfg, rng),
        "claim6.1" => star_absorbs_products(cfg, rng),
        "cor6.2" => double_quasi_inverse_stable(cfg, rng),
        "lemma6.7" => power_stabilization(cfg, rng),
        "claim3.1" => rewrite_preserves_products(cfg, rng),
        "claim4.2" => factorizability_transfers(cfg, rng),
        "lemma6.5" => star_factorization_minors(cfg, rng),
        "ex2.9b" => two_by_two_complete(cfg, rng),
        "oracle-det" => determinant_matches_oracle(cfg, rng),
        _ => unreachable!("registry checked by run_property"),
    }
}

fn det_mult_gs(cfg: &GeneratorConfig, rng: &mut Rng) -> Trial {
    let a = gen_matrix(cfg, rng);
    let b = gen_matrix(cfg, rng);
    let product = a.mul(&b).expect("same dimension");
    let lhs = product.determinant();
    let rhs = &a.determinant() * &b.determinant();
    if lhs.ghost_surpasses(&rhs) {
        Ok(())
    } else {
        fail(
            format!("det(AB) = {lhs} does not ghost-surpass det(A)det(B) = {rhs}"),
            vec![("A", &a), ("B", &b)],
        )
    }
}

fn adjoint_product_determinant(cfg: &GeneratorConfig, rng: &mut Rng) -> Trial {
    let a = gen_matrix(cfg, rng);
    let lhs = a.mul(&a.adjoint()).expect("same dimension").determinant();
    let rhs = a.determinant().pow(cfg.n as u32);
    if lhs == rhs {
        Ok(())
    } else {
        fail(
            format!("det(A adj(A)) = {lhs}, det(A)^n = {rhs}"),
            vec![("A", &a)],
        )
    }
}

fn adjoint_determinant_power(cfg: &GeneratorConfig, rng: &mut Rng) -> Trial {
    let a = gen_matrix(cfg, rng);
    let lhs = a.adjoint().determinant();
    let rhs = a.determinant().pow(cfg.n as u32 - 1);
    if lhs == rhs {
        Ok(())
    } else {
        fail(
            format!("det(adj(A)) = {lhs}, det(A)^(n-1) = {rhs}"),
            vec![("A", &a)],
        )
    }
}

fn adjoint_antimultiplicative(cfg: &GeneratorConfig, rng: &mut Rng) -> Trial {
    let a = gen_matrix(cfg, rng);
    let b = gen_matrix(cfg, rng);
    let lhs = a.mul(&b).expect("same dimension").adjoint();
    let rhs = b.adjoint().mul(&a.adjoint()).expect("same dimension");
    if lhs.ghost_surpasses(&rhs).expect("same dimension") {
        Ok(())
    } else {
        fail(
            "adj(AB) does not ghost-surpass adj(B) adj(A)",
            vec![
                ("A", &a),
                ("B", &b),
                ("adj(AB)", &lhs),
                ("adj(B)adj(A)", &rhs),
            ],
        )
    }
}

fn quasi_identity_shape(cfg: &GeneratorConfig, rng: &mut Rng) -> Trial {
    let a = match gen_nonsingular(cfg, rng) {
        Ok(a) => a,
        Err(e) => return lift(Err(e), "sampling a nonsingular matrix"),
    };
    let nabla = a.quasi_inverse(Mode::Supertropical).expect("nonsingular");
    for (label, product) in [
        ("A A^nabla", a.mul(&nabla).expect("same dimension")),
        ("A^nabla A", nabla.mul(&a).expect("same dimension")),
    ] {
        for i in 1..=cfg.n {
            for j in 1..=cfg.n {
                let entry = product.get(i, j);
                if i == j && !entry.is_one() {
                    return fail(
                        format!("{label} has a non-unit diagonal at ({i}, {i})"),
                        vec![("A", &a), ("product", &product)],
                    );
                }
                if i != j && entry.is_tangible() {
                    return fail(
                        format!("{label} has a tangible off-diagonal at ({i}, {j})"),
                        vec![("A", &a), ("product", &product)],
                    );
                }
            }
        }
        let squared = product.mul(&product).expect("same dimension");
        if squared != product {
            return fail(
                format!("{label} is not multiplicatively idempotent"),
                vec![("A", &a), ("product", &product)],
            );
        }
        if product.classify() != SingularityClass::NonSingular {
            return fail(
                format!("{label} is not nonsingular"),
                vec![("A", &a), ("product", &product)],
            );
        }
    }
    Ok(())
}

fn invertible_quasi_inverse(cfg: &GeneratorConfig, rng: &mut Rng) -> Trial {
    let p = gen_invertible(cfg, rng);
    let inv = p.quasi_inverse(Mode::Supertropical).expect("invertible");
    let identity = Matrix::identity(cfg.n);
    if p.mul(&inv).expect("same dimension") == identity
        && inv.mul(&p).expect("same dimension") == identity
    {
        Ok(())
    } else {
        fail("P^nabla is not a two-sided inverse of P", vec![("P", &p)])
    }
}

fn quasi_inverse_of_shifted(cfg: &GeneratorConfig, rng: &mut Rng) -> Trial {
    let p = gen_invertible(cfg, rng);
    let a = match gen_nonsingular(cfg, rng) {
        Ok(a) => a,
        Err(e) => return lift(Err(e), "sampling a nonsingular matrix"),
    };
    let lhs = p
        .mul(&a)
        .expect("same dimension")
        .quasi_inverse(Mode::Supertropical)
        .expect("PA stays nonsingular");
    let rhs = a
        .quasi_inverse(Mode::Supertropical)
        .expect("nonsingular")
        .mul(&p.quasi_inverse(Mode::Supertropical).expect("invertible"))
        .expect("same dimension");
    if lhs == rhs {
        Ok(())
    } else {
        fail(
            "(PA)^nabla differs from A^nabla P^nabla",
            vec![
                ("P", &p),
                ("A", &a),
                ("(PA)^nabla", &lhs),
                ("A^nabla P^nabla", &rhs),
            ],
        )
    }
}

fn quasi_inverse_through_normal_form(cfg: &GeneratorConfig, rng: &mut Rng) -> Trial {
    let a = match gen_nonsingular(cfg, rng) {
        Ok(a) => a,
        Err(e) => return lift(Err(e), "sampling a nonsingular matrix"),
    };
    let nf = normal_form(&a, Mode::Supertropical).expect("nonsingular");
    let lhs = a.quasi_inverse(Mode::Supertropical).expect("nonsingular");
    let p_inv =
        nf.p.target
            .quasi_inverse(Mode::Supertropical)
            .expect("invertible");
    let rhs = nf
        .abar
        .quasi_inverse(Mode::Supertropical)
        .expect("normal forms of nonsingular matrices are nonsingular")
        .mul(&p_inv)
        .expect("same dimension");
    if lhs == rhs {
        Ok(())
    } else {
        fail(
            "A^nabla differs from Abar^nabla P^-1",
            vec![("A", &a), ("A^nabla", &lhs), ("Abar^nabla P^-1", &rhs)],
        )
    }
}

fn three_by_three_entry_conditions(cfg: &GeneratorConfig, rng: &mut Rng) -> Trial {
    let cfg = GeneratorConfig {
        n: 3,
        ..cfg.clone()
    };
    let abar = match gen_nonsingular_normal_form(&cfg, rng) {
        Ok(m) => m,
        Err(e) => return lift(Err(e), "sampling a nonsingular normal form"),
    };
    let nabla = abar
        .quasi_inverse(Mode::Supertropical)
        .expect("nonsingular");
    let conditions = entry_conditions(&abar).expect("normal form");
    if !conditions.values.nu_eq(&nabla).expect("same dimension") {
        return fail(
            "entry-condition values are not nu-equivalent to the quasi-inverse",
            vec![
                ("Abar", &abar),
                ("values", &conditions.values),
                ("nabla", &nabla),
            ],
        );
    }
    if let Some(witness) = is_factorizable_3x3(&nabla).expect("normal form") {
        return fail(
            format!("quasi-inverse failed the factorizability test: {witness}"),
            vec![("Abar", &abar), ("nabla", &nabla)],
        );
    }
    let mode = if nabla.classify() == SingularityClass::NonSingular {
        Mode::Supertropical
    } else {
        Mode::Tropical
    };
    match factor_3x3(&nabla, mode) {
        Ok(f) => {
            if !f.verify().expect("consistent dimensions") {
                return fail(
                    "quasi-inverse factorization failed to verify",
                    vec![("nabla", &nabla)],
                );
            }
        }
        Err(e) => {
            return fail(
                format!("quasi-inverse factorization errored: {e}"),
                vec![("Abar", &abar), ("nabla", &nabla)],
            )
        }
    }
    let double = nabla
        .quasi_inverse(Mode::Tropical)
        .expect("not strictly singular");
    if !double.nu_eq(&nabla).expect("same dimension") {
        return fail(
            "nabla nabla is not nu-equivalent to nabla",
            vec![("Abar", &abar), ("nabla", &nabla), ("nabla nabla", &double)],
        );
    }
    Ok(())
}

fn gen_nonsingular_normal_form(cfg: &GeneratorConfig, rng: &mut Rng) -> Result<Matrix> {
    for _ in 0..REJECTION_BUDGET {
        let m = gen_matrix(cfg, rng);
        if m.classify() != SingularityClass::NonSingular {
            continue;
        }
        return Ok(normal_form(&m, Mode::Supertropical)?.abar);
    }
    Err(Error::GeneratorExhausted)
}

fn star_absorbs_products(cfg: &GeneratorConfig, rng: &mut Rng) -> Trial {
    let abar = match gen_normal_form(cfg, rng) {
        Ok(m) => m,
        Err(e) => return lift(Err(e), "sampling a normal form"),
    };
    let nabla = abar
        .quasi_inverse(Mode::Tropical)
        .expect("not strictly singular");
    let left = nabla.mul(&abar).expect("same dimension");
    let right = abar.mul(&nabla).expect("same dimension");
    if left.nu_eq(&nabla).expect("same dimension") && right.nu_eq(&nabla).expect("same dimension") {
        Ok(())
    } else {
        fail(
            "A^nabla A, A^nabla, A A^nabla are not all nu-equivalent",
            vec![("Abar", &abar), ("nabla", &nabla)],
        )
    }
}

fn double_quasi_inverse_stable(cfg: &GeneratorConfig, rng: &mut Rng) -> Trial {
    let abar = match gen_normal_form(cfg, rng) {
        Ok(m) => m,
        Err(e) => return lift(Err(e), "sampling a normal form"),
    };
    let nabla = abar
        .quasi_inverse(Mode::Tropical)
        .expect("not strictly singular");
    let double = nabla
        .quasi_inverse(Mode::Tropical)
        .expect("not strictly singular");
    if double.nu_eq(&nabla).expect("same dimension") {
        Ok(())
    } else {
        fail(
            "nabla nabla is not nu-equivalent to nabla",
            vec![("Abar", &abar), ("nabla", &nabla), ("nabla nabla", &double)],
        )
    }
}

fn power_stabilization(cfg: &GeneratorConfig, rng: &mut Rng) -> Trial {
    let abar = match gen_normal_form(cfg, rng) {
        Ok(m) => m,
        Err(e) => return lift(Err(e), "sampling a normal form"),
    };
    let n = cfg.n as u32;
    let low = abar.pow(n.saturating_sub(1));
    let high = abar.pow(n);
    let star = abar.kleene_star(n + 2).expect("normal form");
    let nabla = abar
        .quasi_inverse(Mode::Tropical)
        .expect("not strictly singular");
    let all_nu = low.nu_eq(&high).expect("same dimension")
        && low.nu_eq(&star).expect("same dimension")
        && low.nu_eq(&nabla).expect("same dimension");
    let all_projected = low.project() == high.project()
        && low.project() == star.project()
        && low.project() == nabla.project();
    if all_nu && all_projected {
        Ok(())
    } else {
        fail(
            "A^(n-1), A^n, A*, A^nabla disagree",
            vec![
                ("Abar", &abar),
                ("A^(n-1)", &low),
                ("A^n", &high),
                ("A*", &star),
                ("nabla", &nabla),
            ],
        )
    }
}

fn rewrite_preserves_products(cfg: &GeneratorConfig, rng: &mut Rng) -> Trial {
    let dim = cfg.n.max(2);
    let len = (rng.next_u64() % 12 + 1) as usize;
    let mut factors = Vec::with_capacity(len);
    for _ in 0..len {
        match gen_elementary(cfg, rng) {
            Ok(f) => factors.push(f),
            Err(e) => return lift(Err(e), "sampling an elementary factor"),
        }
    }
    let reordered = match push_type3_left(&factors) {
        Ok(r) => r,
        Err(e) => return lift(Err(e), "reordering"),
    };
    let before = eval_factors(dim, &factors).expect("consistent dimension");
    let after = eval_factors(dim, &reordered).expect("consistent dimension");
    if before != after {
        return fail(
            "reordering changed the product",
            vec![("before", &before), ("after", &after)],
        );
    }
    let boundary = reordered
        .iter()
        .position(|f| !f.is_add_multiple())
        .unwrap_or(reordered.len());
    if reordered[boundary..].iter().any(|f| f.is_add_multiple()) {
        return fail(
            "reordering left an add-multiple behind a swap or scale",
            vec![],
        );
    }
    Ok(())
}

fn factorizability_transfers(cfg: &GeneratorConfig, rng: &mut Rng) -> Trial {
    let cfg = GeneratorConfig {
        n: 3,
        ..cfg.clone()
    };
    let a = match gen_nonsingular(&cfg, rng) {
        Ok(a) => a,
        Err(e) => return lift(Err(e), "sampling a nonsingular matrix"),
    };
    let nf = normal_form(&a, Mode::Supertropical).expect("nonsingular");
    let witness = is_factorizable_3x3(&nf.abar).expect("normal form");
    match factor_3x3(&a, Mode::Supertropical) {
        Ok(f) => {
            if witness.is_some() {
                return fail(
                    "factorization succeeded despite an all-less witness",
                    vec![("A", &a), ("Abar", &nf.abar)],
                );
            }
            if !f.verify().expect("consistent dimensions") {
                return fail("emitted factorization failed to verify", vec![("A", &a)]);
            }
        }
        Err(Error::NotFactorizable(w)) => {
            let Some(expected) = witness else {
                return fail(
                    "factorization refused although the normal form is factorizable",
                    vec![("A", &a), ("Abar", &nf.abar)],
                );
            };
            if w != expected {
                return fail(
                    "witness mismatch between decision and construction",
                    vec![("A", &a)],
                );
            }
            // Witness soundness: the named cycle really is all strict `<`.
            let conditions = entry_conditions(&nf.abar).expect("normal form");
            let crate::factor::NonFactorizabilityWitness::AllLessTrack { cycle } = &w else {
                return fail("unexpected witness kind", vec![("A", &a)]);
            };
            for i in 0..3 {
                let j = cycle.apply(i);
                if conditions.relation(i + 1, j + 1) != crate::factor::Relation::Less {
                    return fail(
                        format!("witness cycle is not all-less at ({}, {})", i + 1, j + 1),
                        vec![("A", &a), ("Abar", &nf.abar)],
                    );
                }
            }
        }
        Err(e) => return lift(Err(e), "factor_3x3"),
    }
    Ok(())
}

fn star_factorization_minors(cfg: &GeneratorConfig, rng: &mut Rng) -> Trial {
    let a = match gen_nonsingular(cfg, rng) {
        Ok(a) => a,
        Err(e) => return lift(Err(e), "sampling a nonsingular matrix"),
    };
    let star = match factor_star(&a, Mode::Supertropical) {
        Ok(s) => s,
        Err(e) => return lift(Err(e), "factor_star"),
    };
    if !star.factorization.verify().expect("consistent dimensions") {
        return fail(
            "star factorization failed tropical verification",
            vec![("A", &a)],
        );
    }
    let eval = star.factorization.eval().expect("consistent dimensions");
    if !eval
        .nu_eq(&star.factorization.target)
        .expect("same dimension")
    {
        return fail(
            "star factorization is not nu-equivalent to the quasi-inverse",
            vec![
                ("A", &a),
                ("eval", &eval),
                ("target", &star.factorization.target),
            ],
        );
    }
    let n = cfg.n;
    let b = &star.star_of_normal_form;
    for &(m, len) in &star.minor_prefixes {
        let partial = eval_factors(n, &star.factorization.factors[..len]).expect("consistent");
        for i in 1..=n {
            for j in 1..=n {
                let ok = if i <= m && j <= m {
                    partial.get(i, j).project() == b.get(i, j).project()
                } else if i == j {
                    partial.get(i, j).is_one()
                } else {
                    partial.get(i, j).is_neg_inf()
                };
                if !ok {
                    return fail(
                        format!("minor prefix {m} mismatches at ({i}, {j})"),
                        vec![("A", &a), ("partial", &partial), ("B", b)],
                    );
                }
            }
        }
    }
    Ok(())
}

fn two_by_two_complete(cfg: &GeneratorConfig, rng: &mut Rng) -> Trial {
    let cfg = GeneratorConfig {
        n: 2,
        ..cfg.clone()
    };
    let a = match gen_not_strictly_singular(&cfg, rng) {
        Ok(a) => a,
        Err(e) => return lift(Err(e), "sampling a not strictly singular matrix"),
    };
    let nonsingular = a.classify() == SingularityClass::NonSingular;
    let mode = if nonsingular {
        Mode::Supertropical
    } else {
        Mode::Tropical
    };
    let f = match factor_2x2(&a, mode) {
        Ok(f) => f,
        Err(e) => return lift(Err(e), "factor_2x2"),
    };
    let expected_mode = if nonsingular {
        crate::elementary::VerifyMode::ExactSupertropical
    } else {
        crate::elementary::VerifyMode::ExactTropical
    };
    if f.mode != expected_mode {
        return fail(
            format!("unexpected verification mode {:?}", f.mode),
            vec![("A", &a)],
        );
    }
    if !f.verify().expect("consistent dimensions") {
        return fail("2x2 factorization failed to verify", vec![("A", &a)]);
    }
    Ok(())
}

fn determinant_matches_oracle(cfg: &GeneratorConfig, rng: &mut Rng) -> Trial {
    let a = gen_matrix(cfg, rng);
    let fast = a.determinant();
    let slow = match oracle_determinant(&a) {
        Ok(s) => s,
        Err(e) => return lift(Err(e), "oracle"),
    };
    if fast == slow {
        Ok(())
    } else {
        fail(
            format!("determinant {fast} disagrees with oracle {slow}"),
            vec![("A", &a)],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        let cfg = GeneratorConfig::new(4, 99);
        let a = gen_matrix(&cfg, &mut Rng::for_trial(cfg.seed, 7));
        let b = gen_matrix(&cfg, &mut Rng::for_trial(cfg.seed, 7));
        assert_eq!(a, b);
        let c = gen_matrix(&cfg, &mut Rng::for_trial(cfg.seed, 8));
        assert_ne!(a, c);
    }

    #[test]
    fn one_by_one_generation() {
        let cfg = GeneratorConfig::new(1, 3);
        let m = gen_matrix(&cfg, &mut Rng::for_trial(cfg.seed, 0));
        assert_eq!(m.dim(), 1);
    }

    #[test]
    fn normal_form_generator_meets_its_contract() {
        let cfg = GeneratorConfig::new(4, 12345);
        for trial in 0..20 {
            let m = gen_normal_form(&cfg, &mut Rng::for_trial(cfg.seed, trial)).unwrap();
            assert!(m.is_normal_form(), "trial {trial} produced {m}");
        }
    }

    #[test]
    fn invertible_generator_meets_its_contract() {
        let cfg = GeneratorConfig::new(5, 7);
        for trial in 0..20 {
            let m = gen_invertible(&cfg, &mut Rng::for_trial(cfg.seed, trial));
            assert!(crate::factor::factor_invertible(&m).is_ok());
        }
    }

    #[test]
    fn empty_density_exhausts_the_normal_form_generator() {
        let cfg = GeneratorConfig {
            density: 0.0,
            ..GeneratorConfig::new(3, 5)
        };
        let err = gen_normal_form(&cfg, &mut Rng::for_trial(cfg.seed, 0)).unwrap_err();
        assert_eq!(err, Error::GeneratorExhausted);
    }

    #[test]
    fn oracle_matches_on_the_worked_example() {
        let a = Matrix::from_int_rows(&[
            &[Some(0), Some(-3), Some(0)],
            &[Some(1), Some(5), Some(0)],
            &[Some(3), Some(1), Some(6)],
        ]);
        assert_eq!(oracle_determinant(&a).unwrap(), Scalar::int(11));
        assert_eq!(
            oracle_determinant(&Matrix::identity(4)).unwrap(),
            Scalar::int(0)
        );
        let tie = Matrix::from_int_rows(&[&[Some(0), Some(0)], &[Some(0), Some(0)]]);
        assert_eq!(oracle_determinant(&tie).unwrap(), Scalar::ghost_int(0));
    }

    #[test]
    fn oracle_rejects_large_dimensions() {
        let m = Matrix::identity(9);
        assert_eq!(
            oracle_determinant(&m).unwrap_err(),
            Error::DimensionTooLarge { n: 9, max: 8 }
        );
    }

    #[test]
    fn run_property_rejects_unknown_names() {
        let cfg = GeneratorConfig::new(3, 1);
        assert!(matches!(
            run_property("lemma-of-the-week", &cfg, 1),
            Err(Error::UnknownProperty(_))
        ));
    }

    #[test]
    fn every_registered_suite_runs_clean_briefly() {
        for name in SUITE_NAMES {
            let cfg = GeneratorConfig::new(3, 0x5EED ^ name.len() as u64);
            let report = run_property(name, &cfg, 8).unwrap();
            assert!(report.passed(), "suite {name} failed:\n{report}");
        }
    }

    #[test]
    fn report_line_format() {
        let cfg = GeneratorConfig::new(2, 42);
        let report = run_property("oracle-det", &cfg, 3).unwrap();
        let line = report.to_string();
        assert!(line.starts_with("PROP oracle-det trials=3 failures=0 seed=42"));
    }
}
