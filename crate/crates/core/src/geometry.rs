//! Control systems in a chart, symbolic Lie brackets and the unimodular
//! frame completion used by the Gram-determinant formula.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use spin::Mutex;

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::linalg::{self, Matrix, Vector};

/// A vector field given by its components in the chart.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(comps: Vec<Expr>) -> VectorField {
        VectorField { comps }
    }

    pub fn zero(n: usize) -> VectorField {
        VectorField { comps: alloc::vec![Expr::zero(); n] }
    }

    /// The coordinate field `∂_i`.
    pub fn coordinate(n: usize, i: usize) -> VectorField {
        let mut comps = alloc::vec![Expr::zero(); n];
        comps[i] = Expr::one();
        VectorField { comps }
    }

    pub fn parse(texts: &[&str], vars: &[&str]) -> Result<VectorField> {
        let comps = texts.iter().map(|t| expr::parse(t, vars)).collect::<core::result::Result<_, _>>()?;
        Ok(VectorField { comps })
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &Expr {
        &self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }

    pub fn eval(&self, vals: &[f64]) -> Vector {
        Vector::from_iterator(self.comps.len(), self.comps.iter().map(|c| c.eval(vals)))
    }

    pub fn simplify(&self) -> VectorField {
        VectorField { comps: self.comps.iter().map(Expr::simplify).collect() }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField { comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect() }
    }

    /// Multiply every component by a scalar function.
    pub fn scaled(&self, f: &Expr) -> VectorField {
        VectorField { comps: self.comps.iter().map(|c| f * c).collect() }
    }

    /// Apply the field to a function as a derivation in the first `dim`
    /// variables.
    pub fn apply(&self, f: &Expr) -> Expr {
        Expr::sum(self.comps.iter().enumerate().map(|(i, c)| c * f.diff(i)))
    }

    pub fn substitute(&self, map: &dyn Fn(usize) -> Option<Expr>) -> VectorField {
        VectorField { comps: self.comps.iter().map(|c| c.substitute(map)).collect() }
    }
}

/// `[V, W]^j = Σ_i V^i ∂_i W^j − W^i ∂_i V^j`, simplified.
pub fn lie_bracket(v: &VectorField, w: &VectorField) -> VectorField {
    assert_eq!(v.dim(), w.dim(), "fields live on different charts");
    let comps = (0..v.dim())
        .map(|j| v.apply(w.component(j)).sub(&w.apply(v.component(j))).simplify())
        .collect();
    VectorField { comps }
}

/// Names `x1..xn`.
pub fn chart_vars(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

#[derive(Default)]
pub(crate) struct Caches {
    pub brackets: Mutex<BTreeMap<Vec<usize>, VectorField>>,
    pub hamiltonian: spin::Once<Arc<crate::hamiltonian::Symbolic>>,
    pub jets: Mutex<Option<Arc<crate::flag::JetCache>>>,
    pub extensions: Mutex<BTreeMap<usize, Arc<crate::flag::ExtensionLevels>>>,
}

/// Affine control system `ẋ = X₀ + Σ u_i X_i` with cost potential `Q` and
/// smooth volume `m(x) dx`.
#[derive(Clone)]
pub struct ControlSystem {
    name: String,
    n: usize,
    drift: VectorField,
    frame: Vec<VectorField>,
    potential: Expr,
    density: Expr,
    pub(crate) caches: Arc<Caches>,
}

impl core::fmt::Debug for ControlSystem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ControlSystem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("k", &self.frame.len())
            .finish()
    }
}

impl ControlSystem {
    pub fn new(
        name: impl Into<String>,
        drift: VectorField,
        frame: Vec<VectorField>,
        potential: Expr,
        density: Expr,
    ) -> Result<ControlSystem> {
        let n = drift.dim();
        if n == 0 {
            return Err(Error::Dimension("chart dimension must be positive".into()));
        }
        if frame.is_empty() || frame.len() > n {
            return Err(Error::Dimension(format!("rank {} not in 1..={n}", frame.len())));
        }
        for (i, f) in frame.iter().enumerate() {
            if f.dim() != n {
                return Err(Error::Dimension(format!("frame field {} has {} components, expected {n}", i + 1, f.dim())));
            }
        }
        let too_wide = drift
            .components()
            .iter()
            .chain(frame.iter().flat_map(|f| f.components()))
            .chain([&potential, &density])
            .any(|e| e.arity() > n);
        if too_wide {
            return Err(Error::Dimension("expression uses variables outside the chart".into()));
        }
        Ok(ControlSystem {
            name: name.into(),
            n,
            drift: drift.simplify(),
            frame: frame.iter().map(VectorField::simplify).collect(),
            potential: potential.simplify(),
            density: density.simplify(),
            caches: Arc::new(Caches::default()),
        })
    }

    /// Build from expression strings over `x1..xn`. An empty `drift` means
    /// no drift.
    pub fn parse(
        name: &str,
        n: usize,
        drift: &[&str],
        frame: &[Vec<&str>],
        potential: &str,
        density: &str,
    ) -> Result<ControlSystem> {
        let names = chart_vars(n);
        let vars: Vec<&str> = names.iter().map(String::as_str).collect();
        let drift = if drift.is_empty() {
            VectorField::zero(n)
        } else {
            if drift.len() != n {
                return Err(Error::Dimension(format!("drift has {} components, expected {n}", drift.len())));
            }
            VectorField::parse(drift, &vars)?
        };
        let mut fields = Vec::with_capacity(frame.len());
        for (i, f) in frame.iter().enumerate() {
            if f.len() != n {
                return Err(Error::Dimension(format!("frame field {} has {} components, expected {n}", i + 1, f.len())));
            }
            fields.push(VectorField::parse(f, &vars)?);
        }
        ControlSystem::new(name, drift, fields, expr::parse(potential, &vars)?, expr::parse(density, &vars)?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.frame.len()
    }

    pub fn drift(&self) -> &VectorField {
        &self.drift
    }

    pub fn frame(&self) -> &[VectorField] {
        &self.frame
    }

    pub fn potential(&self) -> &Expr {
        &self.potential
    }

    pub fn density(&self) -> &Expr {
        &self.density
    }

    pub fn has_drift(&self) -> bool {
        !self.drift.is_zero()
    }

    /// Sub-Riemannian case: no drift and no potential.
    pub fn is_sub_riemannian(&self) -> bool {
        self.drift.is_zero() && self.potential.is_zero()
    }

    pub fn with_drift(&self, drift: VectorField) -> Result<ControlSystem> {
        ControlSystem::new(self.name.clone(), drift, self.frame.clone(), self.potential.clone(), self.density.clone())
    }

    pub fn with_potential(&self, potential: Expr) -> Result<ControlSystem> {
        ControlSystem::new(self.name.clone(), self.drift.clone(), self.frame.clone(), potential, self.density.clone())
    }

    pub fn with_density(&self, density: Expr) -> Result<ControlSystem> {
        ControlSystem::new(self.name.clone(), self.drift.clone(), self.frame.clone(), self.potential.clone(), density)
    }

    pub fn with_name(&self, name: &str) -> ControlSystem {
        let mut s = self.clone();
        s.name = name.to_string();
        s
    }

    /// Field by letter: 0 is the drift, `1..=k` the frame.
    pub fn field(&self, letter: usize) -> &VectorField {
        if letter == 0 {
            &self.drift
        } else {
            &self.frame[letter - 1]
        }
    }

    /// Right-nested bracket `[Y_{w0}, [Y_{w1}, [..., Y_{wl}]]]`, cached
    /// per word.
    pub fn bracket_word(&self, word: &[usize]) -> VectorField {
        assert!(!word.is_empty(), "empty bracket word");
        assert!(word.iter().all(|&a| a <= self.k()), "letter out of range");
        if word.len() == 1 {
            return self.field(word[0]).clone();
        }
        if let Some(v) = self.caches.brackets.lock().get(word) {
            return v.clone();
        }
        let inner = self.bracket_word(&word[1..]);
        let v = lie_bracket(self.field(word[0]), &inner);
        self.caches.brackets.lock().insert(word.to_vec(), v.clone());
        v
    }

    /// Frame values as the columns of an `n × k` matrix.
    pub fn frame_matrix(&self, x: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.k());
        for (j, f) in self.frame.iter().enumerate() {
            m.set_column(j, &f.eval(x));
        }
        m
    }

    pub fn density_at(&self, x: &[f64]) -> Result<f64> {
        let m = self.density.eval(x);
        if m > 0.0 && m.is_finite() {
            Ok(m)
        } else {
            Err(Error::NonPositiveDensity(m))
        }
    }

    /// Numerical check of linear independence of the frame at `x`.
    pub fn check_frame(&self, x: &[f64]) -> Result<()> {
        let mut m = self.frame_matrix(x);
        for mut c in m.column_iter_mut() {
            let nrm = c.norm();
            if !(nrm > 0.0 && nrm.is_finite()) {
                return Err(Error::DependentFrame);
            }
            c /= nrm;
        }
        let s = linalg::singular_values(&m);
        if s.last().copied().unwrap_or(0.0) < 1e-10 {
            return Err(Error::DependentFrame);
        }
        Ok(())
    }
}

/// Basis `Y_1..Y_n` at a point: the frame followed by constant coordinate
/// fields, the last one rescaled so that `m(x)·|det Y| = 1`.
#[derive(Clone, Debug)]
pub struct AuxFrame {
    pub vectors: Matrix,
    pub complement: Vec<usize>,
    inverse: Matrix,
}

impl AuxFrame {
    /// Coordinates of a tangent vector in the basis `Y`.
    pub fn coords(&self, v: &Matrix) -> Matrix {
        &self.inverse * v
    }

    pub fn volume_defect(&self, sys: &ControlSystem, x: &[f64]) -> f64 {
        (sys.density.eval(x) * linalg::det(&self.vectors).abs() - 1.0).abs()
    }
}

/// Greedy choice of coordinate directions completing the frame at `x`,
/// maximising the volume added at each step. Returned in increasing order.
pub fn choose_complement(sys: &ControlSystem, x: &[f64]) -> Result<Vec<usize>> {
    sys.check_frame(x)?;
    let n = sys.n();
    let mut basis = linalg::dominant_basis(&sys.frame_matrix(x), sys.k());
    let mut chosen = Vec::new();
    while chosen.len() < n - sys.k() {
        let mut best = (0usize, -1.0f64);
        for c in 0..n {
            if chosen.contains(&c) {
                continue;
            }
            let e = Matrix::from_fn(n, 1, |i, _| if i == c { 1.0 } else { 0.0 });
            let r = linalg::project_out(&basis, &e).norm();
            if r > best.1 {
                best = (c, r);
            }
        }
        if best.1 < 1e-12 {
            return Err(Error::DegenerateCompletion);
        }
        chosen.push(best.0);
        let mut cols = Matrix::zeros(n, basis.ncols() + 1);
        cols.columns_mut(0, basis.ncols()).copy_from(&basis);
        let e = Matrix::from_fn(n, 1, |i, _| if i == best.0 { 1.0 } else { 0.0 });
        let r = linalg::project_out(&basis, &e);
        cols.set_column(basis.ncols(), &(r.column(0) / best.1));
        basis = cols;
    }
    chosen.sort_unstable();
    Ok(chosen)
}

pub fn aux_frame_at(sys: &ControlSystem, x: &[f64], complement: &[usize]) -> Result<AuxFrame> {
    let (n, k) = (sys.n(), sys.k());
    if complement.len() != n - k || complement.iter().any(|&c| c >= n) {
        return Err(Error::Precondition(format!("complement {complement:?} does not complete rank {k} in dimension {n}")));
    }
    sys.check_frame(x)?;
    let m = sys.density_at(x)?;
    let mut y = Matrix::zeros(n, n);
    y.columns_mut(0, k).copy_from(&sys.frame_matrix(x));
    for (j, &c) in complement.iter().enumerate() {
        y[(c, k + j)] = 1.0;
    }
    let d = linalg::det(&y);
    let scale: f64 = y.column_iter().map(|c| c.norm()).product();
    if !(d.abs() > 1e-12 * scale) {
        return Err(Error::DegenerateCompletion);
    }
    let s = 1.0 / (m * d.abs());
    let mut last = y.column_mut(n - 1);
    last *= s;
    let inverse = y.clone().try_inverse().ok_or(Error::DegenerateCompletion)?;
    Ok(AuxFrame { vectors: y, complement: complement.to_vec(), inverse })
}

/// `m(x)·|det[v_1 … v_n]|` for the columns of `vectors`.
pub fn volume_of(sys: &ControlSystem, x: &[f64], vectors: &Matrix) -> f64 {
    sys.density.eval(x) * linalg::det(vectors).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn heisenberg() -> ControlSystem {
        ControlSystem::parse("h3", 3, &[], &[vec!["1", "0", "-x2/2"], vec!["0", "1", "x1/2"]], "0", "1").unwrap()
    }

    #[test]
    fn heisenberg_bracket_is_vertical() {
        let sys = heisenberg();
        let b = sys.bracket_word(&[1, 2]);
        assert_eq!(b, VectorField::coordinate(3, 2));
        assert!(sys.bracket_word(&[1, 1]).is_zero());
        // second call hits the cache
        assert_eq!(sys.bracket_word(&[1, 2]), b);
    }

    #[test]
    fn coordinate_fields_commute() {
        let b = lie_bracket(&VectorField::coordinate(2, 0), &VectorField::coordinate(2, 1));
        assert!(b.is_zero());
    }

    #[test]
    fn aux_frame_examples() {
        let sys = heisenberg();
        let f = aux_frame_at(&sys, &[0.0; 3], &[2]).unwrap();
        assert_eq!(f.vectors, Matrix::identity(3, 3));

        let e = ControlSystem::parse("e", 2, &[], &[vec!["1", "0"], vec!["0", "1"]], "0", "exp(x1)").unwrap();
        let f = aux_frame_at(&e, &[0.0, 0.0], &[]).unwrap();
        assert_eq!(f.vectors, Matrix::identity(2, 2));
        let f = aux_frame_at(&e, &[1.0, 0.0], &[]).unwrap();
        assert!((f.vectors[(1, 1)] - libm::exp(-1.0)).abs() < 1e-15);
        assert!(f.volume_defect(&e, &[1.0, 0.0]) < 1e-10);
    }

    #[test]
    fn greedy_complement_and_degenerate_choice() {
        let sys = heisenberg();
        assert_eq!(choose_complement(&sys, &[0.3, -0.2, 1.0]).unwrap(), vec![2]);
        let martinet =
            ControlSystem::parse("m", 3, &[], &[vec!["1", "0", "0"], vec!["0", "1", "x1^2"]], "0", "1").unwrap();
        assert_eq!(aux_frame_at(&martinet, &[0.0; 3], &[0]).unwrap_err(), Error::DegenerateCompletion);
    }

    #[test]
    fn volumes() {
        let sys = heisenberg();
        let id = Matrix::identity(3, 3);
        assert_eq!(volume_of(&sys, &[0.0; 3], &id), 1.0);
        assert!((volume_of(&sys, &[0.0; 3], &(id.clone() * 0.5)) - 0.125).abs() < 1e-15);
        let mut rep = id;
        let c0 = rep.column(0).into_owned();
        rep.set_column(1, &c0);
        assert_eq!(volume_of(&sys, &[0.0; 3], &rep), 0.0);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(ControlSystem::parse("x", 2, &[], &[vec!["1"]], "0", "1").is_err());
        assert!(ControlSystem::parse("x", 1, &[], &[vec!["x2"]], "0", "1").is_err());
        assert!(ControlSystem::parse("x", 1, &[], &[], "0", "1").is_err());
    }
}
