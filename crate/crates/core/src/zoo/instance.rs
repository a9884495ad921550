//! Seeded instance generation and a line-oriented spec format for replay.
//!
//! ```text
//! kind quadratic
//! dims 200
//! kappa 10000
//! seed 7
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{gaussian_matrix, gaussian_vector, geometric_spacing, seeded_rng, spd_with_spectrum, Matrix, Vector};
use crate::oracle::SmoothOracle;
use crate::solvers::{aor_hb_two_var, Reference, SolverConfig};

use super::lasso::{make_l1l2, make_lasso, sparse_recovery_data};
use super::logistic::{make_logistic, LogisticSpec};
use super::mspbe::generate_mspbe;
use super::piecewise::{make_piecewise, PiecewiseSpec};
use super::{LeastSquares, Problem, Quadratic, SmoothProblem};

/// Gradient norm targeted by self-consistent references.
pub const SELF_REFERENCE_TOLERANCE: f64 = 1e-12;
/// Iteration cap for self-consistent reference runs.
pub const SELF_REFERENCE_MAX_ITERS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InstanceKind {
    Quadratic,
    Piecewise,
    Logistic,
    Lasso,
    L1L2,
    LeastSquaresSingular,
    Mspbe,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 7] = [
        InstanceKind::Quadratic,
        InstanceKind::Piecewise,
        InstanceKind::Logistic,
        InstanceKind::Lasso,
        InstanceKind::L1L2,
        InstanceKind::LeastSquaresSingular,
        InstanceKind::Mspbe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::Quadratic => "quadratic",
            InstanceKind::Piecewise => "piecewise",
            InstanceKind::Logistic => "logistic",
            InstanceKind::Lasso => "lasso",
            InstanceKind::L1L2 => "l1l2",
            InstanceKind::LeastSquaresSingular => "least_squares_singular",
            InstanceKind::Mspbe => "mspbe",
        }
    }

    /// Names accepted in [`InstanceSpec::params`].
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            InstanceKind::Piecewise => &["mu", "r"],
            InstanceKind::Logistic => &["lambda"],
            InstanceKind::Lasso | InstanceKind::L1L2 => &["lambda", "sparsity"],
            _ => &[],
        }
    }

    /// Dimensions used when a spec gives fewer than the kind needs.
    fn default_dims(self) -> &'static [usize] {
        match self {
            InstanceKind::Quadratic => &[50],
            InstanceKind::Piecewise => &[50, 5],
            InstanceKind::Logistic => &[50, 200],
            InstanceKind::Lasso | InstanceKind::L1L2 => &[256, 64],
            InstanceKind::LeastSquaresSingular => &[40, 30, 15],
            InstanceKind::Mspbe => &[250, 20],
        }
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InstanceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        InstanceKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unsupported instance kind `{s}`")))
    }
}

/// Everything needed to rebuild an instance bit for bit.
///
/// `dims` per kind: quadratic `[d]`; piecewise `[d, p]`; logistic `[m, d]`
/// (samples, features); lasso and l1l2 `[rows, cols]`; singular least
/// squares `[rows, cols, rank]`; mspbe `[m, n]`. Extra constants live in
/// `params`: `mu` and `r` (piecewise), `lambda` (logistic, lasso, l1l2),
/// `sparsity` (lasso, l1l2).
///
/// For lasso and l1l2 a missing `kappa` keeps the plain Gaussian matrix;
/// otherwise its singular values are reshaped to give `L/μ = κ`.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub dims: Vec<usize>,
    pub kappa: Option<f64>,
    pub seed: u64,
    pub params: BTreeMap<String, f64>,
}

impl InstanceSpec {
    pub fn new(kind: InstanceKind, dims: &[usize], kappa: Option<f64>, seed: u64) -> Self {
        Self { kind, dims: dims.to_vec(), kappa, seed, params: BTreeMap::new() }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    fn param(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn dim(&self, i: usize) -> usize {
        self.dims.get(i).copied().unwrap_or(self.kind.default_dims()[i])
    }

    fn kappa_required(&self) -> Result<f64> {
        let k = self.kappa.ok_or_else(|| Error::InvalidInput(format!("{} instances need kappa", self.kind)))?;
        if !(k >= 1.0 && k.is_finite()) {
            return Err(Error::InvalidInput(format!("kappa must be a finite number ≥ 1, got {k}")));
        }
        Ok(k)
    }

    /// Builds the instance described by this spec.
    pub fn build(&self) -> Result<Problem> {
        if self.dims.contains(&0) {
            return Err(Error::InvalidInput("dimensions must be positive".into()));
        }
        if let Some(k) = self.params.keys().find(|k| !self.kind.param_names().contains(&k.as_str())) {
            return Err(Error::InvalidInput(format!("{} instances take no parameter `{k}`", self.kind)));
        }
        let mut rng = seeded_rng(self.seed);
        match self.kind {
            InstanceKind::Quadratic => {
                let kappa = self.kappa_required()?;
                let d = self.dim(0);
                let spectrum = geometric_spacing(1.0, kappa, d);
                let a = spd_with_spectrum(&spectrum, &mut rng);
                let b = gaussian_vector(d, &mut rng);
                let (mu, l) = (spectrum[0], spectrum[d - 1]);
                let q = Quadratic::with_constants(a, b, 0.0, mu, l)?;
                let x = q.minimizer().cloned().ok_or_else(|| Error::Construction("quadratic not factorizable".into()))?;
                let value = q.value(&x);
                Ok(smooth(q, Some(Reference::exact(x, Some(value)))))
            }
            InstanceKind::Piecewise => {
                let kappa = self.kappa_required()?;
                let (d, p) = (self.dim(0), self.dim(1));
                let mu = self.param("mu", 1.0);
                let spec = PiecewiseSpec {
                    a: gaussian_matrix(d, p, &mut rng),
                    b: gaussian_vector(p, &mut rng),
                    mu,
                    lipschitz: kappa * mu,
                    r: self.param("r", 1e-6),
                };
                let f = make_piecewise(&spec)?;
                let reference = self_reference(&f, &Vector::zeros(d))?;
                Ok(smooth(f, Some(reference)))
            }
            InstanceKind::Logistic => {
                let (m, d) = (self.dim(0), self.dim(1));
                let features = gaussian_matrix(m, d, &mut rng);
                let labels = Vector::from_fn(m, |_, _| if rand::Rng::random::<bool>(&mut rng) { 1.0 } else { -1.0 });
                let lambda_reg = match (self.params.get("lambda"), self.kappa) {
                    (Some(&l), _) => l,
                    (None, _) => {
                        let kappa = self.kappa_required()?;
                        if kappa <= 1.0 {
                            return Err(Error::InvalidInput("logistic instances need kappa > 1".into()));
                        }
                        let (_, top) = crate::linalg::gram_extreme_eigenvalues(&features);
                        top / (kappa - 1.0)
                    }
                };
                let f = make_logistic(&LogisticSpec { features, labels, lambda_reg })?;
                let reference = self_reference(&f, &Vector::zeros(d))?;
                Ok(smooth(f, Some(reference)))
            }
            InstanceKind::Lasso | InstanceKind::L1L2 => {
                let (rows, cols) = (self.dim(0), self.dim(1));
                let sparsity = self.param("sparsity", 5.0) as usize;
                let lambda = self.param("lambda", 0.8);
                let (mut a, mut b, x_true) = sparse_recovery_data(rows, cols, sparsity.min(cols), self.seed)?;
                if self.kappa.is_some() {
                    let kappa = self.kappa_required()?;
                    a = reshape_singular_values(&a, kappa)?;
                    b = &a * x_true;
                }
                let problem =
                    if self.kind == InstanceKind::Lasso { make_lasso(a, b, lambda)? } else { make_l1l2(a, b, lambda)? };
                Ok(Problem::Composite(problem))
            }
            InstanceKind::LeastSquaresSingular => {
                let (rows, cols, rank) = (self.dim(0), self.dim(1), self.dim(2));
                if rank >= cols.min(rows) {
                    return Err(Error::InvalidInput(format!(
                        "singular least squares needs rank < min(rows, cols) (rank {rank}, {rows}x{cols})"
                    )));
                }
                let mut a = gaussian_matrix(rows, rank, &mut rng) * gaussian_matrix(rank, cols, &mut rng);
                if self.kappa.is_some() {
                    a = reshape_singular_values(&a, self.kappa_required()?)?;
                }
                let b = gaussian_vector(rows, &mut rng);
                let ls = LeastSquares::new(a, b)?;
                let x = ls.min_norm_solution();
                let value = ls.value(&x);
                Ok(smooth(ls, Some(Reference::exact(x, Some(value)))))
            }
            InstanceKind::Mspbe => {
                let kappa = self.kappa_required()?;
                Ok(Problem::Saddle(generate_mspbe(self.dim(0), self.dim(1), kappa, self.seed)?))
            }
        }
    }

    /// Parses the `key value` line format; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut dims = None;
        let mut kappa = None;
        let mut seed = None;
        let mut params = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: i + 1, message };
            let (key, value) = line
                .split_once(char::is_whitespace)
                .map(|(k, v)| (k, v.trim()))
                .ok_or_else(|| err(format!("expected `key value`, found `{line}`")))?;
            match key {
                "kind" => kind = Some(value.parse::<InstanceKind>().map_err(|e| err(e.to_string()))?),
                "dims" => {
                    let parsed: std::result::Result<Vec<usize>, _> = value.split(',').map(|d| d.trim().parse()).collect();
                    dims = Some(parsed.map_err(|e| err(format!("bad dims `{value}`: {e}")))?);
                }
                "kappa" => kappa = Some(value.parse::<f64>().map_err(|e| err(format!("bad kappa `{value}`: {e}")))?),
                "seed" => seed = Some(value.parse::<u64>().map_err(|e| err(format!("bad seed `{value}`: {e}")))?),
                other => {
                    let v = value.parse::<f64>().map_err(|e| err(format!("bad value for `{other}`: {e}")))?;
                    params.insert(other.to_string(), v);
                }
            }
        }
        let missing = |what: &str| Error::Parse { line: 0, message: format!("missing `{what}`") };
        Ok(Self {
            kind: kind.ok_or_else(|| missing("kind"))?,
            dims: dims.unwrap_or_default(),
            kappa,
            seed: seed.ok_or_else(|| missing("seed"))?,
            params,
        })
    }
}

impl fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kind {}", self.kind)?;
        if !self.dims.is_empty() {
            let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
            writeln!(f, "dims {}", dims.join(","))?;
        }
        if let Some(k) = self.kappa {
            writeln!(f, "kappa {k:?}")?;
        }
        writeln!(f, "seed {}", self.seed)?;
        for (k, v) in &self.params {
            writeln!(f, "{k} {v:?}")?;
        }
        Ok(())
    }
}

impl FromStr for InstanceSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Seeded instance with condition number `kappa`.
pub fn generate_instance(kind: InstanceKind, dims: &[usize], kappa: f64, seed: u64) -> Result<Problem> {
    InstanceSpec::new(kind, dims, Some(kappa), seed).build()
}

fn smooth<O: SmoothOracle + 'static>(oracle: O, reference: Option<Reference>) -> Problem {
    Problem::Smooth(SmoothProblem { oracle: Arc::new(oracle), reference })
}

/// Minimizer found by AOR-HB itself, flagged as self-consistent.
fn self_reference<O: SmoothOracle>(oracle: &O, x0: &Vector) -> Result<Reference> {
    let cfg = SolverConfig::new(SELF_REFERENCE_MAX_ITERS)
        .with_grad_tolerance(SELF_REFERENCE_TOLERANCE)
        .with_record_every(SELF_REFERENCE_MAX_ITERS)
        .without_objective();
    let trace = aor_hb_two_var(oracle, x0, x0, &cfg)?;
    let value = oracle.value(&trace.x_final);
    Ok(Reference { point: trace.x_final, value: Some(value), self_consistent: true })
}

/// Replaces the nonzero singular values of `a` by a geometric sequence from
/// `√(rows)` to `√(κ·rows)`, so the nonzero spectrum of `AᵀA` spans a ratio of `κ`.
fn reshape_singular_values(a: &Matrix, kappa: f64) -> Result<Matrix> {
    let svd = a.clone().svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Construction("SVD failed".into())),
    };
    let top = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10 * top).count();
    let scale = (a.nrows() as f64).sqrt();
    let shaped = geometric_spacing(scale, scale * kappa.sqrt(), rank);
    // Singular values come sorted in decreasing order.
    let mut sigma = Vector::zeros(svd.singular_values.len());
    for i in 0..rank {
        sigma[i] = shaped[rank - 1 - i];
    }
    Ok(u * Matrix::from_diagonal(&sigma) * vt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn smooth_of(p: Problem) -> SmoothProblem {
        match p {
            Problem::Smooth(s) => s,
            other => panic!("expected a smooth problem, got {}", other.class()),
        }
    }

    #[test]
    fn quadratic_kappa_is_exact() {
        let p = smooth_of(generate_instance(InstanceKind::Quadratic, &[200], 1e4, 7).unwrap());
        assert_eq!(p.oracle.lipschitz() / p.oracle.mu(), 1e4);
        let q = p.oracle.as_ref();
        let x = Vector::from_element(200, 0.5);
        let p2 = smooth_of(generate_instance(InstanceKind::Quadratic, &[200], 1e4, 7).unwrap());
        assert_eq!(q.value(&x), p2.oracle.value(&x));
        assert_eq!(q.gradient(&x), p2.oracle.gradient(&x));
    }

    #[test]
    fn mspbe_kappa_within_five_percent() {
        let Problem::Saddle(p) = generate_instance(InstanceKind::Mspbe, &[60, 10], 1e4, 3).unwrap() else {
            panic!("expected saddle")
        };
        let ratio = p.g.lipschitz() / p.g.mu();
        assert!((ratio / 1e4 - 1.0).abs() < 0.05);
    }

    #[test]
    fn lasso_kappa_shaping() {
        let spec = InstanceSpec::new(InstanceKind::Lasso, &[80, 20], Some(50.0), 2);
        let Problem::Composite(p) = spec.build().unwrap() else { panic!() };
        assert!((p.f.lipschitz() / p.f.mu() / 50.0 - 1.0).abs() < 0.05);
        let plain = InstanceSpec::new(InstanceKind::Lasso, &[80, 20], None, 2);
        assert!(plain.build().is_ok());
    }

    #[test]
    fn logistic_kappa_and_reference() {
        let p = smooth_of(generate_instance(InstanceKind::Logistic, &[30, 10], 100.0, 1).unwrap());
        assert!((p.oracle.lipschitz() / p.oracle.mu() / 100.0 - 1.0).abs() < 1e-12);
        let r = p.reference.unwrap();
        assert!(r.self_consistent);
        assert!(p.oracle.gradient(&r.point).norm() <= 1e-10);
    }

    #[test]
    fn piecewise_reference_is_stationary() {
        let p = smooth_of(generate_instance(InstanceKind::Piecewise, &[20, 5], 100.0, 4).unwrap());
        let r = p.reference.unwrap();
        assert!(r.self_consistent);
        assert!(p.oracle.gradient(&r.point).norm() <= 1e-10);
    }

    #[test]
    fn singular_least_squares() {
        let p = smooth_of(generate_instance(InstanceKind::LeastSquaresSingular, &[40, 30, 15], 100.0, 2).unwrap());
        assert_eq!(p.oracle.mu(), 0.0);
        let x = &p.reference.as_ref().unwrap().point;
        assert!(p.oracle.gradient(x).norm() < 1e-8);
    }

    #[test]
    fn invalid_kinds_and_specs() {
        assert!("banana".parse::<InstanceKind>().is_err());
        assert!(generate_instance(InstanceKind::Quadratic, &[5], 0.5, 1).is_err());
        assert!(InstanceSpec::parse("dims 3\nseed 1").is_err());
        assert!(matches!(InstanceSpec::parse("kind quadratic\nseed x"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn parse_example() {
        let s = InstanceSpec::parse("# replay\nkind quadratic\ndims 200\nkappa 10000\nseed 7\n").unwrap();
        assert_eq!(s, InstanceSpec::new(InstanceKind::Quadratic, &[200], Some(1e4), 7));
        let (lo, hi) = match s.build().unwrap() {
            Problem::Smooth(p) => (p.oracle.mu(), p.oracle.lipschitz()),
            _ => unreachable!(),
        };
        assert_eq!((lo, hi), (1.0, 1e4));
    }

    #[test]
    fn unknown_params_are_rejected() {
        let s = InstanceSpec::new(InstanceKind::Quadratic, &[3], Some(2.0), 0).with_param("lambda", 1.0);
        assert!(matches!(s.build(), Err(Error::InvalidInput(_))));
        let s = InstanceSpec::new(InstanceKind::Lasso, &[12, 6], None, 0).with_param("sparsity", 2.0);
        assert!(s.build().is_ok());
    }

    fn any_spec() -> impl Strategy<Value = InstanceSpec> {
        (
            0..InstanceKind::ALL.len(),
            prop::collection::vec(1usize..10_000, 0..4),
            prop::option::of(1.0f64..1e12),
            any::<u64>(),
            prop::collection::btree_map("[a-z_]{1,8}", -1e300f64..1e300, 0..4),
        )
            .prop_filter("reserved keys", |(_, _, _, _, p)| {
                !p.keys().any(|k| ["kind", "dims", "kappa", "seed"].contains(&k.as_str()))
            })
            .prop_map(|(k, dims, kappa, seed, params)| InstanceSpec { kind: InstanceKind::ALL[k], dims, kappa, seed, params })
    }

    proptest! {
        #[test]
        fn spec_text_round_trips(spec in any_spec()) {
            let text = spec.to_string();
            prop_assert_eq!(InstanceSpec::parse(&text).unwrap(), spec);
        }
    }
}
