use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::grid::TorusGrid;
use crate::error::{Error, Result};

/// Real nodal values on a [`TorusGrid`].
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<TorusGrid>,
    values: Vec<f64>,
}

/// `d` scalar components on a common grid.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

/// Either kind of field, for operations that dispatch on arity.
#[derive(Clone, Debug)]
pub enum Field {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl ScalarField {
    pub fn from_values(grid: &Arc<TorusGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "expected {} nodal values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn zeros(grid: &Arc<TorusGrid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Arc<TorusGrid>, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    /// Sample `f(x)` at every node; unused coordinates are 0.
    pub fn from_fn(grid: &Arc<TorusGrid>, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.coordinates(i))).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert!(self.same_grid(other));
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            *s += a * o;
        }
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn check_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "grid mismatch: {:?} vs {:?}",
                self.grid, other.grid
            )))
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Quadrature ∫ f dx (spectrally exact for band-limited fields).
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn subtract_mean(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    /// ‖f‖₀ by quadrature.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl VectorField {
    pub fn from_components(components: Vec<ScalarField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::Shape("vector field needs components".into()))?;
        if components.len() != first.grid().dim() {
            return Err(Error::Shape(format!(
                "vector field on a {}-d grid needs {} components, got {}",
                first.grid().dim(),
                first.grid().dim(),
                components.len()
            )));
        }
        for c in &components[1..] {
            first.check_grid(c)?;
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: &Arc<TorusGrid>) -> Self {
        Self {
            components: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    /// Field whose only nonzero component is along `axis`.
    pub fn along(axis: usize, field: ScalarField) -> Self {
        let grid = field.grid().clone();
        let mut v = Self::zeros(&grid);
        v.components[axis] = field;
        v
    }

    pub fn from_fn(grid: &Arc<TorusGrid>, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let components = (0..grid.dim())
            .map(|a| ScalarField::from_fn(grid, |x| f(x)[a]))
            .collect();
        Self { components }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [ScalarField] {
        &mut self.components
    }

    pub fn component(&self, axis: usize) -> &ScalarField {
        &self.components[axis]
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self {
            components: self.components.iter().map(f).collect(),
        }
    }

    pub fn zip_components(
        &self,
        other: &Self,
        f: impl Fn(&ScalarField, &ScalarField) -> ScalarField,
    ) -> Self {
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_components(|f| f.scale(c))
    }

    /// Multiply every component by a scalar field pointwise.
    pub fn times(&self, s: &ScalarField) -> Self {
        self.map_components(|f| f * s)
    }

    pub fn dot(&self, other: &Self) -> ScalarField {
        let mut acc = ScalarField::zeros(self.grid());
        for (a, b) in self.components.iter().zip(&other.components) {
            for ((o, x), y) in acc.values.iter_mut().zip(&a.values).zip(&b.values) {
                *o += x * y;
            }
        }
        acc
    }

    pub fn norm_squared(&self) -> ScalarField {
        self.dot(self)
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (s, o) in self.components.iter_mut().zip(&other.components) {
            s.axpy(a, o);
        }
    }

    pub fn check_grid(&self, other: &Self) -> Result<()> {
        self.components[0].check_grid(&other.components[0])
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Componentwise spatial integral.
    pub fn integral(&self) -> Vec<f64> {
        self.components.iter().map(ScalarField::integral).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(ScalarField::is_finite)
    }
}

impl Field {
    pub fn grid(&self) -> &Arc<TorusGrid> {
        match self {
            Field::Scalar(f) => f.grid(),
            Field::Vector(v) => v.grid(),
        }
    }

    pub fn components(&self) -> &[ScalarField] {
        match self {
            Field::Scalar(f) => std::slice::from_ref(f),
            Field::Vector(v) => v.components(),
        }
    }

    pub fn into_scalar(self) -> Result<ScalarField> {
        match self {
            Field::Scalar(f) => Ok(f),
            Field::Vector(_) => Err(Error::Shape("expected a scalar field".into())),
        }
    }

    pub fn into_vector(self) -> Result<VectorField> {
        match self {
            Field::Vector(v) => Ok(v),
            Field::Scalar(_) => Err(Error::Shape("expected a vector field".into())),
        }
    }
}

impl From<ScalarField> for Field {
    fn from(f: ScalarField) -> Self {
        Field::Scalar(f)
    }
}

impl From<VectorField> for Field {
    fn from(v: VectorField) -> Self {
        Field::Vector(v)
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                self.zip_map(rhs, |a, b| a $op b)
            }
        }
    };
}

scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|v| -v)
    }
}

impl Add<&VectorField> for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        self.zip_components(rhs, |a, b| a + b)
    }
}

impl Sub<&VectorField> for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        self.zip_components(rhs, |a, b| a - b)
    }
}

impl Neg for &VectorField {
    type Output = VectorField;
    fn neg(self) -> VectorField {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn vector_needs_dim_components() {
        let g = make_grid(2, 8).unwrap();
        let err = VectorField::from_components(vec![ScalarField::zeros(&g)]);
        assert!(matches!(err, Err(Error::Shape(_))));
    }

    #[test]
    fn constant_integral_and_norm() {
        let g = make_grid(1, 16).unwrap();
        let c = ScalarField::constant(&g, 3.0);
        let two_pi = 2.0 * std::f64::consts::PI;
        assert!((c.integral() - 3.0 * two_pi).abs() < 1e-12);
        assert!((c.l2_norm() - 3.0 * two_pi.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn wrong_length_is_shape_error() {
        let g = make_grid(1, 8).unwrap();
        assert!(matches!(
            ScalarField::from_values(&g, vec![0.0; 7]),
            Err(Error::Shape(_))
        ));
    }
}
