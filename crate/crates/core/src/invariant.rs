//! Quadratic dynamical invariant, ladder operators and the Hamiltonian as
//! actions on sampled wave functions.
//!
//! Operators are small expression trees ([`GridOperator`]) over two
//! primitives: multiplication by a polynomial in `x` and the first derivative.
//! The derivative uses the fourth-order central stencil with one-sided
//! fourth-order rows at the two ends of the grid. Each derivative application
//! also computes the second-order estimate; when the two disagree by more
//! than [`COARSE_LIMIT`] (relative, in the discrete L2 sense) the grid does not
//! resolve the field and [`Error::GridTooCoarse`] is returned.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::ermakov::{SystemState, Trajectory};
use crate::error::{Error, Result};
use crate::expr::{CoeffValues, CoefficientSet};
use crate::hermite::{inner_product, ComplexField, Grid};

pub const COARSE_LIMIT: f64 = 1e-3;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Linear action on a [`ComplexField`].
#[derive(Debug, Clone, PartialEq)]
pub enum GridOperator {
    Identity,
    /// Multiplication by `c[0] + c[1] x + c[2] x^2 + ...`.
    Polynomial(Vec<Complex64>),
    /// `d/dx`.
    Derivative,
    Scale(Complex64, Box<GridOperator>),
    Sum(Vec<GridOperator>),
    /// `outer(inner(f))`.
    Compose(Box<GridOperator>, Box<GridOperator>),
}

impl GridOperator {
    pub fn poly(coeffs: &[f64]) -> Self {
        GridOperator::Polynomial(coeffs.iter().map(|&c| re(c)).collect())
    }

    /// `p = -i d/dx`.
    pub fn momentum() -> Self {
        GridOperator::Derivative.scale(-I)
    }

    pub fn scale(self, k: Complex64) -> Self {
        GridOperator::Scale(k, Box::new(self))
    }

    pub fn plus(self, other: GridOperator) -> Self {
        match self {
            GridOperator::Sum(mut terms) => {
                terms.push(other);
                GridOperator::Sum(terms)
            }
            first => GridOperator::Sum(vec![first, other]),
        }
    }

    pub fn minus(self, other: GridOperator) -> Self {
        self.plus(other.scale(re(-1.0)))
    }

    /// `self ∘ inner`.
    pub fn after(self, inner: GridOperator) -> Self {
        GridOperator::Compose(Box::new(self), Box::new(inner))
    }

    /// `[self, other] = self ∘ other - other ∘ self`.
    pub fn commutator(&self, other: &GridOperator) -> Self {
        self.clone()
            .after(other.clone())
            .minus(other.clone().after(self.clone()))
    }

    pub fn apply(&self, f: &ComplexField) -> Result<ComplexField> {
        match self {
            GridOperator::Identity => Ok(f.clone()),
            GridOperator::Polynomial(c) => Ok(ComplexField {
                grid: f.grid,
                values: f
                    .grid
                    .points()
                    .zip(&f.values)
                    .map(|(x, v)| v * c.iter().rev().fold(re(0.0), |acc, ck| acc * x + ck))
                    .collect(),
            }),
            GridOperator::Derivative => derivative_checked(f),
            GridOperator::Scale(k, op) => Ok(op.apply(f)?.scaled(*k)),
            GridOperator::Sum(terms) => {
                let mut out = ComplexField::zeros(f.grid);
                for t in terms {
                    out = out.axpy(re(1.0), &t.apply(f)?)?;
                }
                Ok(out)
            }
            GridOperator::Compose(outer, inner) => outer.apply(&inner.apply(f)?),
        }
    }
}

/// Fourth-order first derivative.
pub fn derivative4(grid: &Grid, v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    let k = 1.0 / (12.0 * grid.spacing());
    let mut d = vec![re(0.0); n];
    for j in 2..n - 2 {
        d[j] = (v[j - 2] - v[j - 1] * 8.0 + v[j + 1] * 8.0 - v[j + 2]) * k;
    }
    d[0] = (v[0] * -25.0 + v[1] * 48.0 - v[2] * 36.0 + v[3] * 16.0 - v[4] * 3.0) * k;
    d[1] = (v[0] * -3.0 - v[1] * 10.0 + v[2] * 18.0 - v[3] * 6.0 + v[4]) * k;
    d[n - 1] = (v[n - 1] * 25.0 - v[n - 2] * 48.0 + v[n - 3] * 36.0 - v[n - 4] * 16.0 + v[n - 5] * 3.0) * k;
    d[n - 2] = (v[n - 1] * 3.0 + v[n - 2] * 10.0 - v[n - 3] * 18.0 + v[n - 4] * 6.0 - v[n - 5]) * k;
    d
}

/// Second-order first derivative.
pub fn derivative2(grid: &Grid, v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    let k = 1.0 / (2.0 * grid.spacing());
    let mut d = vec![re(0.0); n];
    for j in 1..n - 1 {
        d[j] = (v[j + 1] - v[j - 1]) * k;
    }
    d[0] = (v[0] * -3.0 + v[1] * 4.0 - v[2]) * k;
    d[n - 1] = (v[n - 1] * 3.0 - v[n - 2] * 4.0 + v[n - 3]) * k;
    d
}

fn derivative_checked(f: &ComplexField) -> Result<ComplexField> {
    let d4 = derivative4(&f.grid, &f.values);
    let d2 = derivative2(&f.grid, &f.values);
    let scale: f64 = d4.iter().map(|z| z.norm_sqr()).sum();
    if scale > 0.0 {
        let diff: f64 = d4.iter().zip(&d2).map(|(a, b)| (a - b).norm_sqr()).sum();
        let mismatch = (diff / scale).sqrt();
        if mismatch > COARSE_LIMIT {
            return Err(Error::GridTooCoarse {
                mismatch,
                limit: COARSE_LIMIT,
            });
        }
    }
    Ok(ComplexField {
        grid: f.grid,
        values: d4,
    })
}

/// `lambda(t) = exp(-int (c - 2d))`, read from the trajectory.
pub fn lambda_t(traj: &Trajectory, t: f64) -> Result<f64> {
    Ok(traj.state_at(t)?.lambda())
}

/// `p - 2 alpha x - delta`.
pub fn shifted_momentum(s: &SystemState) -> GridOperator {
    GridOperator::momentum().minus(GridOperator::poly(&[s.delta, 2.0 * s.alpha]))
}

/// `beta x + epsilon`.
fn coordinate(s: &SystemState) -> GridOperator {
    GridOperator::poly(&[s.epsilon, s.beta])
}

pub fn annihilation(s: &SystemState) -> GridOperator {
    coordinate(s)
        .plus(shifted_momentum(s).scale(I / s.beta))
        .scale(re(std::f64::consts::FRAC_1_SQRT_2))
}

pub fn creation(s: &SystemState) -> GridOperator {
    coordinate(s)
        .minus(shifted_momentum(s).scale(I / s.beta))
        .scale(re(std::f64::consts::FRAC_1_SQRT_2))
}

/// `E = (lambda/2) [(p - 2 alpha x - delta)^2 / beta^2 + (beta x + epsilon)^2]`.
pub fn quadratic_invariant(s: &SystemState) -> GridOperator {
    let a = shifted_momentum(s);
    let kinetic = a.clone().after(a).scale(re(1.0 / (s.beta * s.beta)));
    let q = coordinate(s);
    kinetic
        .plus(q.clone().after(q))
        .scale(re(0.5 * s.lambda()))
}

/// `P = (lambda / beta)(p - 2 alpha x - delta)`.
pub fn linear_invariant(s: &SystemState) -> GridOperator {
    shifted_momentum(s).scale(re(s.lambda() / s.beta))
}

/// `Q = lambda (beta x + epsilon)`.
pub fn linear_coordinate(s: &SystemState) -> GridOperator {
    coordinate(s).scale(re(s.lambda()))
}

/// `H = a p^2 + b x^2 + (c/2)(px + xp) + (i/2)(c - 2d) - f x - g p`.
pub fn hamiltonian(v: &CoeffValues) -> GridOperator {
    let p = GridOperator::momentum();
    let kinetic = p.clone().after(p.clone()).scale(re(v.a));
    // (px + xp)/2 = -i (x d/dx + 1/2)
    let cross = GridOperator::poly(&[0.0, 1.0])
        .after(GridOperator::Derivative)
        .plus(GridOperator::poly(&[0.5]))
        .scale(-I * v.c);
    let constant = Complex64::new(0.0, 0.5 * (v.c - 2.0 * v.d));
    kinetic
        .plus(cross)
        .plus(GridOperator::Polynomial(vec![constant, re(-v.f), re(v.b)]))
        .plus(p.scale(re(-v.g)))
}

pub fn apply_annihilation(f: &ComplexField, s: &SystemState) -> Result<ComplexField> {
    annihilation(s).apply(f)
}

pub fn apply_creation(f: &ComplexField, s: &SystemState) -> Result<ComplexField> {
    creation(s).apply(f)
}

pub fn apply_linear_invariant(f: &ComplexField, s: &SystemState) -> Result<ComplexField> {
    linear_invariant(s).apply(f)
}

pub fn apply_hamiltonian(f: &ComplexField, coeffs: &CoefficientSet, t: f64) -> Result<ComplexField> {
    hamiltonian(&coeffs.at(t)?).apply(f)
}

/// Imaginary residue tolerated in an expectation that is real in exact arithmetic.
const HERMITIAN_SLACK: f64 = 1e-8;

/// `<f, E f> / <f, f>`.
pub fn expectation_invariant(f: &ComplexField, s: &SystemState) -> Result<f64> {
    let ef = quadratic_invariant(s).apply(f)?;
    let num = inner_product(f, &ef)?;
    let den = inner_product(f, f)?.re;
    let value = num / den;
    if value.im.abs() > HERMITIAN_SLACK * (1.0 + value.re.abs()) {
        return Err(Error::NonHermitianResidue { residue: value.im });
    }
    Ok(value.re)
}

/// `K(x, y) = mu^{-1/2} exp(i(alpha x^2 + beta x y + gamma y^2 + delta x + epsilon y + kappa))`.
pub fn kernel_k(s: &SystemState, x: f64, y: f64) -> Complex64 {
    let phase = s.alpha * x * x + s.beta * x * y + s.gamma * y * y + s.delta * x + s.epsilon * y + s.kappa;
    Complex64::from_polar((-0.5 * s.ln_mu).exp(), phase)
}

pub fn kernel_field(s: &SystemState, y: f64, grid: &Grid) -> ComplexField {
    ComplexField::from_fn(*grid, |x| kernel_k(s, x, y))
}

/// `|| beta^{-1}(p - 2 alpha x - delta) K - y K || / ||K||` on `grid`.
pub fn kernel_eigen_residual(s: &SystemState, y: f64, grid: &Grid) -> Result<f64> {
    let k = kernel_field(s, y, grid);
    let lhs = apply_linear_invariant(&k, s)?.scaled(re(1.0 / s.lambda()));
    Ok(lhs.distance(&k.scaled(re(y)))? / k.norm())
}

/// Closed form of `lambda Re<Psi_n, H Psi_n>`.
pub fn hamiltonian_expectation_from_values(n: usize, s: &SystemState, v: &CoeffValues) -> f64 {
    let CoeffValues { a, b, c, f, g, .. } = *v;
    let SystemState {
        alpha,
        beta,
        delta,
        epsilon,
        ..
    } = *s;
    let nh = n as f64 + 0.5;
    let shift = delta - 2.0 * alpha * epsilon / beta;
    let ratio = epsilon / beta;
    nh * (a * (beta * beta + 4.0 * alpha * alpha / (beta * beta)) + (b + 2.0 * c * alpha) / (beta * beta))
        + a * shift * shift
        + ratio * (f + b * ratio)
        - shift * (g + c * ratio)
}

pub fn hamiltonian_expectation_analytic(n: usize, s: &SystemState, coeffs: &CoefficientSet, t: f64) -> Result<f64> {
    Ok(hamiltonian_expectation_from_values(n, s, &coeffs.at(t)?))
}

/// Truncated oscillator algebra: `(a)_{k-1,k} = sqrt(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockTruncation {
    pub dim: usize,
    pub a: DMatrix<f64>,
    pub a_dag: DMatrix<f64>,
}

impl FockTruncation {
    pub fn new(dim: usize) -> Self {
        let a = DMatrix::from_fn(dim, dim, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 });
        let a_dag = a.transpose();
        FockTruncation { dim, a, a_dag }
    }

    pub fn number(&self) -> DMatrix<f64> {
        &self.a_dag * &self.a
    }
}

/// `J+ = (a^dag)^2 / 2`, `J- = a^2 / 2`, `J0 = (a a^dag + a^dag a) / 4`.
#[derive(Debug, Clone, PartialEq)]
pub struct Su11 {
    pub fock: FockTruncation,
    pub j_plus: DMatrix<f64>,
    pub j_minus: DMatrix<f64>,
    pub j_zero: DMatrix<f64>,
}

pub fn su11_generators(dim: usize) -> Result<Su11> {
    if dim < 8 {
        return Err(Error::Precondition(format!("truncation dimension must be >= 8, got {dim}")));
    }
    let fock = FockTruncation::new(dim);
    let (a, ad) = (&fock.a, &fock.a_dag);
    let j_plus = (ad * ad) * 0.5;
    let j_minus = (a * a) * 0.5;
    let j_zero = (a * ad + ad * a) * 0.25;
    Ok(Su11 {
        fock,
        j_plus,
        j_minus,
        j_zero,
    })
}

/// Largest entry-wise defect of each commutation relation on the leading
/// `(N-2) x (N-2)` block, where truncation has no effect.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Su11Defects {
    pub zero_plus: f64,
    pub zero_minus: f64,
    pub plus_minus: f64,
    /// Largest entry among the matrices involved, for scaling a tolerance.
    pub scale: f64,
}

impl Su11 {
    pub fn defects(&self) -> Su11Defects {
        let m = self.fock.dim - 2;
        let comm = |x: &DMatrix<f64>, y: &DMatrix<f64>| x * y - y * x;
        let block_max = |d: DMatrix<f64>| d.view((0, 0), (m, m)).abs().max();
        let zero_plus = block_max(comm(&self.j_zero, &self.j_plus) - &self.j_plus);
        let zero_minus = block_max(comm(&self.j_zero, &self.j_minus) + &self.j_minus);
        let plus_minus = block_max(comm(&self.j_plus, &self.j_minus) + &self.j_zero * 2.0);
        let pm = &self.j_plus * &self.j_minus;
        let scale = pm.abs().max().max(self.j_zero.abs().max());
        Su11Defects {
            zero_plus,
            zero_minus,
            plus_minus,
            scale,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{hermite_function, sample_modes, Basis};

    fn state() -> SystemState {
        // A generic non-stationary state with beta mu = lambda.
        let beta: f64 = 1.3;
        let ln_lambda: f64 = -0.2;
        SystemState {
            t: 0.7,
            alpha: 0.21,
            beta,
            gamma: -0.4,
            delta: 0.35,
            epsilon: -0.6,
            kappa: 0.1,
            ln_mu: ln_lambda - beta.ln(),
            ln_lambda,
        }
    }

    fn fine_grid() -> Grid {
        Grid::with_spacing(-12.0, 12.0, 0.01).unwrap()
    }

    #[test]
    fn stencils_are_exact_on_low_degree_polynomials() {
        let g = Grid::new(0.0, 1.0, 101).unwrap();
        let quartic: Vec<Complex64> = g.points().map(|x| re(x.powi(4))).collect();
        for (x, dx) in g.points().zip(derivative4(&g, &quartic)) {
            assert!((dx.re - 4.0 * x.powi(3)).abs() < 1e-10);
        }
        let quadratic: Vec<Complex64> = g.points().map(|x| re(x * x)).collect();
        for (x, dx) in g.points().zip(derivative2(&g, &quadratic)) {
            assert!((dx.re - 2.0 * x).abs() < 1e-10);
        }
    }

    #[test]
    fn ground_state_is_annihilated() {
        let s = state();
        let g = fine_grid();
        let modes = sample_modes(6, &s, &g, Basis::Invariant).unwrap();
        let lam_sqrt = s.lambda().sqrt();
        assert!(apply_annihilation(&modes[0], &s).unwrap().norm() * lam_sqrt < 1e-4);
        for n in 1..=5 {
            let lowered = apply_annihilation(&modes[n], &s).unwrap();
            let err = lowered.axpy(re(-(n as f64).sqrt()), &modes[n - 1]).unwrap().norm();
            assert!(err * lam_sqrt < 1e-4, "n = {n}: {err}");
            let raised = apply_creation(&modes[n - 1], &s).unwrap();
            let err = raised.axpy(re(-(n as f64).sqrt()), &modes[n]).unwrap().norm();
            assert!(err * lam_sqrt < 1e-4, "n = {n}: {err}");
        }
        let raised = apply_creation(&modes[0], &s).unwrap();
        let overlap = inner_product(&modes[1], &raised).unwrap() * s.lambda();
        assert!((overlap - 1.0).norm() < 1e-4);
    }

    #[test]
    fn sho_creation_maps_h0_to_h1() {
        let s = SystemState::default();
        let g = fine_grid();
        let h0 = ComplexField::from_fn(g, |x| re(hermite_function(0, x).unwrap()));
        let h1 = ComplexField::from_fn(g, |x| re(hermite_function(1, x).unwrap()));
        assert!(apply_creation(&h0, &s).unwrap().distance(&h1).unwrap() < 1e-8);
        // p h0 vanishes at the origin by parity
        let ph0 = apply_linear_invariant(&h0, &s).unwrap();
        assert!(ph0.values[g.n_points / 2].norm() < 1e-12);
    }

    #[test]
    fn invariant_eigenvalues() {
        let s = state();
        let g = fine_grid();
        let modes = sample_modes(8, &s, &g, Basis::Invariant).unwrap();
        for (n, m) in modes.iter().enumerate() {
            let e = expectation_invariant(m, &s).unwrap();
            assert!((e / s.lambda() - (n as f64 + 0.5)).abs() < 1e-5, "n = {n}: {e}");
        }
        let mix = modes[0].axpy(re(1.0), &modes[1]).unwrap();
        let e = expectation_invariant(&mix, &s).unwrap();
        assert!((e - s.lambda()).abs() < 1e-5);
    }

    #[test]
    fn coarse_grid_is_detected() {
        let s = state();
        let g = Grid::with_spacing(-12.0, 12.0, 0.25).unwrap();
        let modes = sample_modes(6, &s, &g, Basis::Invariant).unwrap();
        assert!(matches!(apply_annihilation(&modes[6], &s), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn canonical_commutators() {
        let s = state();
        let g = fine_grid();
        let f = ComplexField::from_fn(g, |x| {
            Complex64::from_polar((-(x - 0.5).powi(2)).exp() * (1.0 + 0.3 * x), 0.4 * x)
        });
        let comm = annihilation(&s).commutator(&creation(&s)).apply(&f).unwrap();
        assert!(comm.distance(&f).unwrap() < 1e-4);
        let qp = linear_coordinate(&s).commutator(&linear_invariant(&s)).apply(&f).unwrap();
        let expected = f.scaled(I * s.lambda().powi(2));
        assert!(qp.distance(&expected).unwrap() < 1e-4);
    }

    #[test]
    fn kernel_examples() {
        let zero = SystemState {
            beta: 0.0,
            ..SystemState::default()
        };
        assert_eq!(kernel_k(&zero, 0.3, -1.2), re(1.0));
        let s = state();
        for (x, y) in [(0.0, 0.0), (2.0, -1.0), (-3.5, 0.25)] {
            assert!((kernel_k(&s, x, y).norm() - (-0.5 * s.ln_mu).exp()).abs() < 1e-14);
        }
        let g = Grid::with_spacing(-6.0, 6.0, 0.01).unwrap();
        assert!(kernel_eigen_residual(&s, 0.7, &g).unwrap() < 1e-6);
    }

    #[test]
    fn su11_relations() {
        let su = su11_generators(64).unwrap();
        let d = su.defects();
        let tol = 16.0 * f64::EPSILON * d.scale;
        assert!(d.zero_plus <= tol && d.zero_minus <= tol && d.plus_minus <= tol, "{d:?}");
        for k in 0..64 {
            assert!((su.j_zero[(k, k)] - (2 * k + 1) as f64 / 4.0).abs() < 1e-12 || k == 63);
        }
        let n = su.fock.number();
        for k in 0..64 {
            assert_eq!(n[(k, k)].round(), k as f64);
        }
        assert_eq!(su.fock.a_dag, su.fock.a.transpose());
        assert!(su11_generators(7).is_err());
    }

    #[test]
    fn hamiltonian_on_sho_eigenstates() {
        let g = fine_grid();
        let sho = crate::presets::Preset::Sho.coefficients();
        for n in 0..=5 {
            let h = ComplexField::from_fn(g, |x| re(hermite_function(n, x).unwrap()));
            let hh = apply_hamiltonian(&h, &sho, 0.0).unwrap();
            let err = hh.distance(&h.scaled(re(n as f64 + 0.5))).unwrap();
            assert!(err < 1e-6, "n = {n}: {err}");
            let s = SystemState::default();
            assert_eq!(hamiltonian_expectation_analytic(n, &s, &sho, 0.0).unwrap(), n as f64 + 0.5);
        }
    }

    #[test]
    fn non_self_adjoint_part_is_imaginary() {
        let g = fine_grid();
        let coeffs = CoefficientSet::parse(["0.5", "0.5", "0.2", "0", "0", "0"]).unwrap();
        let f = ComplexField::from_fn(g, |x| re((-(x - 0.3).powi(2)).exp()));
        let hf = apply_hamiltonian(&f, &coeffs, 0.0).unwrap();
        let e = inner_product(&f, &hf).unwrap();
        let norm2 = inner_product(&f, &f).unwrap().re;
        assert!((e.im - 0.1 * norm2).abs() < 1e-8, "{e}");
    }

    #[test]
    fn analytic_hamiltonian_matches_quadrature() {
        let s = state();
        let coeffs = CoefficientSet::parse(["0.6", "0.45", "0.15", "0.05", "0.3", "-0.2"]).unwrap();
        let g = fine_grid();
        let modes = sample_modes(3, &s, &g, Basis::Invariant).unwrap();
        for (n, m) in modes.iter().enumerate() {
            let hm = apply_hamiltonian(m, &coeffs, s.t).unwrap();
            let quad = inner_product(m, &hm).unwrap().re * s.lambda();
            let exact = hamiltonian_expectation_analytic(n, &s, &coeffs, s.t).unwrap();
            assert!(((quad - exact) / exact).abs() < 1e-5, "n = {n}: {quad} vs {exact}");
        }
    }
}
