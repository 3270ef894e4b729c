use std::sync::Arc;

use num_complex::Complex64;

use super::field::{Field, ScalarField, VectorField};
use super::grid::TorusGrid;
use crate::error::{Error, Result};

/// Relative tolerance on the mean of a Poisson source: `|mean| <= TOL_MEAN * ‖rhs‖₀`.
pub const TOL_MEAN: f64 = 1e-12;

/// Normalised Fourier coefficients (`f̂_k = N⁻¹ Σ f_j e^{-ik·x_j}`).
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: Arc<TorusGrid>,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn of(field: &ScalarField) -> Self {
        let grid = field.grid().clone();
        let mut coeffs: Vec<Complex64> = field
            .values()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        grid.transform(&mut coeffs, false);
        let scale = 1.0 / grid.len() as f64;
        for c in &mut coeffs {
            *c *= scale;
        }
        Self { grid, coeffs }
    }

    pub fn from_coeffs(grid: &Arc<TorusGrid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Shape(format!(
                "expected {} Fourier coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Real part of the inverse transform.
    pub fn to_field(&self) -> ScalarField {
        let mut data = self.coeffs.clone();
        self.grid.transform(&mut data, true);
        let values = data.into_iter().map(|c| c.re).collect();
        ScalarField::from_values(&self.grid, values).expect("spectrum length matches grid")
    }

    /// New spectrum with every coefficient multiplied by `m(flat index)`.
    pub fn multiply(&self, m: impl Fn(usize) -> Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| c * m(i))
                .collect(),
        }
    }

    pub fn dealiased(&self) -> Self {
        let mask = self.grid.dealias_mask();
        self.multiply(|i| {
            if mask[i] {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Spectral symbol of ∂^α; odd-order derivatives drop the Nyquist mode.
    pub fn derivative(&self, alpha: &[u32]) -> Self {
        let grid = self.grid.clone();
        self.multiply(|i| derivative_symbol(&grid, i, alpha))
    }
}

fn derivative_symbol(grid: &TorusGrid, flat: usize, alpha: &[u32]) -> Complex64 {
    let mut m = Complex64::new(1.0, 0.0);
    for (axis, &order) in alpha.iter().enumerate() {
        if order == 0 {
            continue;
        }
        let k = grid.wavenumber(flat, axis);
        if order % 2 == 1 && k == grid.nyquist() {
            return Complex64::new(0.0, 0.0);
        }
        m *= Complex64::new(0.0, k as f64).powu(order);
    }
    m
}

fn unit_alpha(dim: usize, axis: usize) -> Vec<u32> {
    let mut a = vec![0; dim];
    a[axis] = 1;
    a
}

/// Which differential operator to apply in [`apply_diff`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffOp {
    Gradient,
    Divergence,
    Laplacian,
}

/// Spectral derivative of the trigonometric interpolant.
pub fn apply_diff(kind: DiffOp, f: &Field) -> Result<Field> {
    match (kind, f) {
        (DiffOp::Gradient, Field::Scalar(s)) => Ok(gradient(s).into()),
        (DiffOp::Divergence, Field::Vector(v)) => Ok(divergence(v).into()),
        (DiffOp::Laplacian, Field::Scalar(s)) => Ok(laplacian(s).into()),
        (kind, Field::Scalar(_)) => Err(Error::Shape(format!("{kind:?} of a scalar field"))),
        (kind, Field::Vector(_)) => Err(Error::Shape(format!("{kind:?} of a vector field"))),
    }
}

/// ∂^α f for a multi-index with one entry per axis.
pub fn partial(f: &ScalarField, alpha: &[u32]) -> ScalarField {
    if alpha.iter().all(|&a| a == 0) {
        return f.clone();
    }
    Spectrum::of(f).derivative(alpha).to_field()
}

pub fn gradient(f: &ScalarField) -> VectorField {
    gradient_of_spectrum(&Spectrum::of(f))
}

fn gradient_of_spectrum(spec: &Spectrum) -> VectorField {
    let dim = spec.grid().dim();
    let components = (0..dim)
        .map(|a| spec.derivative(&unit_alpha(dim, a)).to_field())
        .collect();
    VectorField::from_components(components).expect("gradient has d components")
}

pub fn divergence(v: &VectorField) -> ScalarField {
    let grid = v.grid().clone();
    let dim = grid.dim();
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (a, comp) in v.components().iter().enumerate() {
        let d = Spectrum::of(comp).derivative(&unit_alpha(dim, a));
        for (s, c) in acc.iter_mut().zip(d.coeffs()) {
            *s += c;
        }
    }
    Spectrum { grid, coeffs: acc }.to_field()
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    let grid = f.grid().clone();
    Spectrum::of(f)
        .multiply(|i| Complex64::new(-grid.k_squared(i), 0.0))
        .to_field()
}

/// Remove every mode outside the 2/3-rule band.
pub fn dealias(f: &ScalarField) -> ScalarField {
    Spectrum::of(f).dealiased().to_field()
}

/// Dealiased divergence of a (typically nonlinear) flux.
pub fn divergence_dealiased(v: &VectorField) -> ScalarField {
    let grid = v.grid().clone();
    let dim = grid.dim();
    let mask = grid.dealias_mask().to_vec();
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (a, comp) in v.components().iter().enumerate() {
        let d = Spectrum::of(comp).derivative(&unit_alpha(dim, a));
        for ((s, c), keep) in acc.iter_mut().zip(d.coeffs()).zip(&mask) {
            if *keep {
                *s += c;
            }
        }
    }
    Spectrum { grid, coeffs: acc }.to_field()
}

/// Dealiased gradient of a (typically nonlinear) scalar.
pub fn gradient_dealiased(f: &ScalarField) -> VectorField {
    gradient_of_spectrum(&Spectrum::of(f).dealiased())
}

/// Fails when `|mean(f)| > TOL_MEAN * ‖f‖₀`.
pub fn check_zero_mean(f: &ScalarField, context: &'static str) -> Result<()> {
    let mean = f.mean();
    let tol = TOL_MEAN * f.l2_norm();
    if mean.abs() > tol || !mean.is_finite() {
        return Err(Error::Compatibility { mean, tol, context });
    }
    Ok(())
}

/// Δ⁻¹ on the zero-mean subspace; the k = 0 mode of the source is discarded.
pub(crate) fn inverse_laplacian_spectrum(rhs: &ScalarField) -> Spectrum {
    let grid = rhs.grid().clone();
    Spectrum::of(rhs).multiply(|i| {
        let k2 = grid.k_squared(i);
        if k2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-1.0 / k2, 0.0)
        }
    })
}

/// Solve Δφ = rhs with ∫φ = 0.
pub fn solve_poisson_zero_mean(rhs: &ScalarField) -> Result<ScalarField> {
    check_zero_mean(rhs, "poisson source")?;
    Ok(inverse_laplacian_spectrum(rhs).to_field())
}

/// g = ∇Δ⁻¹z, so that div g = z and curl g = 0.
pub fn grad_inv_laplacian(z: &ScalarField) -> Result<VectorField> {
    check_zero_mean(z, "grad-inverse-laplacian source")?;
    Ok(gradient_of_spectrum(&inverse_laplacian_spectrum(z)))
}

/// All multi-indices α with |α| = order in `dim` variables.
pub fn multi_indices(dim: usize, order: u32) -> Vec<Vec<u32>> {
    fn rec(dim: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == dim {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=remaining).rev() {
            prefix.push(a);
            rec(dim, remaining - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, order, &mut Vec::with_capacity(dim), &mut out);
    out
}

/// Σ_{|α|=order} ‖∂^α f‖₀², summed over components of a vector field.
pub fn seminorm_squared(f: &Field, order: u32) -> f64 {
    let dim = f.grid().dim();
    let alphas = multi_indices(dim, order);
    f.components()
        .iter()
        .map(|c| {
            if order == 0 {
                return c.l2_norm().powi(2);
            }
            let spec = Spectrum::of(c);
            alphas
                .iter()
                .map(|a| spec.derivative(a).to_field().l2_norm().powi(2))
                .sum::<f64>()
        })
        .sum()
}

/// ‖f‖_l² = Σ_{|α|≤l} ‖∂^α f‖₀².
pub fn sobolev_norm_squared(f: &Field, l: u32) -> f64 {
    (0..=l).map(|m| seminorm_squared(f, m)).sum()
}

pub fn sobolev_norm(f: &Field, l: u32) -> f64 {
    sobolev_norm_squared(f, l).sqrt()
}

/// ‖·‖_l of a scalar field.
pub fn scalar_norm(f: &ScalarField, l: u32) -> f64 {
    sobolev_norm(&Field::Scalar(f.clone()), l)
}

/// ‖·‖_l of a vector field.
pub fn vector_norm(v: &VectorField, l: u32) -> f64 {
    sobolev_norm(&Field::Vector(v.clone()), l)
}

/// L² norm of the antisymmetric part of ∇g (0 in one dimension).
pub fn curl_norm(g: &VectorField) -> f64 {
    let dim = g.dim();
    let mut total = 0.0;
    for j in 0..dim {
        for k in (j + 1)..dim {
            let djk = partial(g.component(k), &unit_alpha(dim, j));
            let dkj = partial(g.component(j), &unit_alpha(dim, k));
            total += (&djk - &dkj).l2_norm().powi(2);
        }
    }
    total.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    fn sin_k(g: &Arc<TorusGrid>, k: f64) -> ScalarField {
        ScalarField::from_fn(g, |x| (k * x[0]).sin())
    }

    #[test]
    fn gradient_of_sine() {
        let g = make_grid(2, 16).unwrap();
        let grad = gradient(&sin_k(&g, 1.0));
        let expect = ScalarField::from_fn(&g, |x| x[0].cos());
        assert!((grad.component(0) - &expect).max_abs() < 1e-13);
        assert!(grad.component(1).max_abs() < 1e-13);
    }

    #[test]
    fn divergence_of_constant_is_zero() {
        let g = make_grid(3, 8).unwrap();
        let v = VectorField::from_fn(&g, |_| [1.0, -2.0, 0.5]);
        assert!(divergence(&v).max_abs() < 1e-14);
    }

    #[test]
    fn laplacian_of_sin2() {
        let g = make_grid(1, 32).unwrap();
        let lap = laplacian(&sin_k(&g, 2.0));
        let expect = sin_k(&g, 2.0).scale(-4.0);
        assert!((&lap - &expect).max_abs() < 1e-12);
    }

    #[test]
    fn arity_mismatch_is_shape_error() {
        let g = make_grid(1, 8).unwrap();
        let s = Field::Scalar(ScalarField::zeros(&g));
        let v = Field::Vector(VectorField::zeros(&g));
        assert!(matches!(
            apply_diff(DiffOp::Divergence, &s),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            apply_diff(DiffOp::Gradient, &v),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            apply_diff(DiffOp::Laplacian, &v),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn poisson_single_mode() {
        let g = make_grid(1, 16).unwrap();
        let phi = solve_poisson_zero_mean(&sin_k(&g, 1.0)).unwrap();
        assert!((&phi + &sin_k(&g, 1.0)).max_abs() < 1e-14);
        let zero = solve_poisson_zero_mean(&ScalarField::zeros(&g)).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn poisson_rejects_constant_source() {
        let g = make_grid(1, 16).unwrap();
        let err = solve_poisson_zero_mean(&ScalarField::constant(&g, 1.0));
        assert!(matches!(err, Err(Error::Compatibility { .. })));
    }

    #[test]
    fn grad_inv_laplacian_examples() {
        let g = make_grid(1, 16).unwrap();
        let out = grad_inv_laplacian(&sin_k(&g, 1.0)).unwrap();
        let expect = ScalarField::from_fn(&g, |x| -x[0].cos());
        assert!((out.component(0) - &expect).max_abs() < 1e-14);
        let zero = grad_inv_laplacian(&ScalarField::zeros(&g)).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        assert!(grad_inv_laplacian(&ScalarField::constant(&g, 2.0)).is_err());

        let z = ScalarField::from_fn(&g, |x| x[0].cos() + (2.0 * x[0]).cos());
        let back = divergence(&grad_inv_laplacian(&z).unwrap());
        assert!((&back - &z).max_abs() < 1e-13);
    }

    #[test]
    fn sobolev_examples() {
        let g = make_grid(1, 32).unwrap();
        let c = Field::Scalar(ScalarField::constant(&g, -1.5));
        for l in 0..4 {
            assert!((sobolev_norm(&c, l) - 1.5 * (2.0 * PI).sqrt()).abs() < 1e-12);
        }
        let s1 = Field::Scalar(sin_k(&g, 1.0));
        assert!((sobolev_norm(&s1, 1) - (2.0 * PI).sqrt()).abs() < 1e-12);
        let s2 = Field::Scalar(sin_k(&g, 2.0));
        assert!((sobolev_norm(&s2, 1) - (5.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(1, 3), vec![vec![3]]);
        assert_eq!(multi_indices(2, 2).len(), 3);
        assert_eq!(multi_indices(3, 2).len(), 6);
        assert_eq!(multi_indices(3, 0), vec![vec![0, 0, 0]]);
        for a in multi_indices(3, 3) {
            assert_eq!(a.iter().sum::<u32>(), 3);
        }
    }

    #[test]
    fn mixed_partial_in_2d() {
        let g = make_grid(2, 16).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].sin() * (2.0 * x[1]).cos());
        let d = partial(&f, &[1, 1]);
        let expect = ScalarField::from_fn(&g, |x| -2.0 * x[0].cos() * (2.0 * x[1]).sin());
        assert!((&d - &expect).max_abs() < 1e-12);
    }

    #[test]
    fn gradient_is_curl_free() {
        let g = make_grid(2, 16).unwrap();
        let f = ScalarField::from_fn(&g, |x| (x[0] + 2.0 * x[1]).sin() + x[1].cos());
        assert!(curl_norm(&gradient(&f)) < 1e-12);
        let rot = VectorField::from_fn(&g, |x| [-x[1].sin(), x[0].sin(), 0.0]);
        assert!(curl_norm(&rot) > 1.0);
    }
}
