//! Discretized substrate: nutrient, attractant and repellent concentrations
//! plus a growable/forbidden mask on a regular 2D or 3D grid.

use crate::geometry::Point;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("grid must have 2 or 3 axes with at least one cell each, got {0:?}")]
    InvalidDims(Vec<usize>),
    #[error("cell size must be positive and finite, got {0}")]
    InvalidCellSize(f64),
    #[error("{layer} value {value} at cell {index} is outside [0, 1]")]
    OutOfRange {
        layer: &'static str,
        index: usize,
        value: f64,
    },
    #[error("{layer} has {got} cells, grid has {expected}")]
    LengthMismatch {
        layer: &'static str,
        expected: usize,
        got: usize,
    },
}

/// Concentration layer selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Nutrient,
    Attractant,
    Repellent,
}

impl Layer {
    pub fn name(self) -> &'static str {
        match self {
            Layer::Nutrient => "nutrient",
            Layer::Attractant => "attractant",
            Layer::Repellent => "repellent",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubstrateField {
    dim: usize,
    shape: [usize; 3],
    cell_size: f64,
    nutrient: Vec<f64>,
    attractant: Vec<f64>,
    repellent: Vec<f64>,
    growable: Vec<bool>,
}

impl SubstrateField {
    /// An all-growable field with zero concentrations. `shape` holds cells per
    /// axis and must have two or three entries.
    pub fn new(shape: &[usize], cell_size: f64) -> Result<Self, FieldError> {
        if !(2..=3).contains(&shape.len()) || shape.iter().any(|&n| n == 0) {
            return Err(FieldError::InvalidDims(shape.to_vec()));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(FieldError::InvalidCellSize(cell_size));
        }
        let mut full = [1usize; 3];
        full[..shape.len()].copy_from_slice(shape);
        let cells = full.iter().product();
        Ok(Self {
            dim: shape.len(),
            shape: full,
            cell_size,
            nutrient: vec![0.0; cells],
            attractant: vec![0.0; cells],
            repellent: vec![0.0; cells],
            growable: vec![true; cells],
        })
    }

    /// Uniform nutrient level everywhere, no chemical gradients, no mask.
    pub fn uniform(shape: &[usize], cell_size: f64, nutrient: f64) -> Result<Self, FieldError> {
        let mut field = Self::new(shape, cell_size)?;
        field.fill(Layer::Nutrient, |_| nutrient)?;
        Ok(field)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis (only the first `dim` entries are meaningful).
    pub fn shape(&self) -> &[usize] {
        &self.shape[..self.dim]
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cell_count(&self) -> usize {
        self.growable.len()
    }

    /// Physical extent per axis in millimetres.
    pub fn extent(&self) -> Point {
        let mut e = [0.0; 3];
        for (axis, slot) in e.iter_mut().enumerate().take(self.dim) {
            *slot = self.shape[axis] as f64 * self.cell_size;
        }
        e
    }

    pub fn layer(&self, layer: Layer) -> &[f64] {
        match layer {
            Layer::Nutrient => &self.nutrient,
            Layer::Attractant => &self.attractant,
            Layer::Repellent => &self.repellent,
        }
    }

    pub fn mask(&self) -> &[bool] {
        &self.growable
    }

    /// Replaces a whole layer. Values must lie in `[0, 1]`.
    pub fn set_layer(&mut self, layer: Layer, values: Vec<f64>) -> Result<(), FieldError> {
        if values.len() != self.cell_count() {
            return Err(FieldError::LengthMismatch {
                layer: layer.name(),
                expected: self.cell_count(),
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(FieldError::OutOfRange {
                layer: layer.name(),
                index,
                value,
            });
        }
        *self.layer_mut(layer) = values;
        Ok(())
    }

    /// Sets a layer from a function of the cell centre.
    pub fn fill<F: Fn(Point) -> f64>(&mut self, layer: Layer, f: F) -> Result<(), FieldError> {
        let values = (0..self.cell_count()).map(|i| f(self.cell_center(i))).collect();
        self.set_layer(layer, values)
    }

    pub fn set_mask(&mut self, growable: Vec<bool>) -> Result<(), FieldError> {
        if growable.len() != self.cell_count() {
            return Err(FieldError::LengthMismatch {
                layer: "mask",
                expected: self.cell_count(),
                got: growable.len(),
            });
        }
        self.growable = growable;
        Ok(())
    }

    /// Marks every cell whose centre satisfies `forbidden` as non-growable.
    pub fn forbid<F: Fn(Point) -> bool>(&mut self, forbidden: F) {
        for i in 0..self.cell_count() {
            if forbidden(self.cell_center(i)) {
                self.growable[i] = false;
            }
        }
    }

    fn layer_mut(&mut self, layer: Layer) -> &mut Vec<f64> {
        match layer {
            Layer::Nutrient => &mut self.nutrient,
            Layer::Attractant => &mut self.attractant,
            Layer::Repellent => &mut self.repellent,
        }
    }

    fn coords(&self, index: usize) -> [usize; 3] {
        let [nx, ny, _] = self.shape;
        [index % nx, (index / nx) % ny, index / (nx * ny)]
    }

    fn index(&self, c: [usize; 3]) -> usize {
        let [nx, ny, _] = self.shape;
        c[0] + nx * (c[1] + ny * c[2])
    }

    pub fn cell_center(&self, index: usize) -> Point {
        let c = self.coords(index);
        let mut p = [0.0; 3];
        for axis in 0..self.dim {
            p[axis] = (c[axis] as f64 + 0.5) * self.cell_size;
        }
        p
    }

    fn cell_coords(&self, pos: Point) -> Option<[usize; 3]> {
        let mut c = [0usize; 3];
        for axis in 0..self.dim {
            let x = pos[axis] / self.cell_size;
            if !x.is_finite() || x < 0.0 {
                return None;
            }
            let i = x.floor() as usize;
            if i >= self.shape[axis] {
                return None;
            }
            c[axis] = i;
        }
        Some(c)
    }

    /// Index of the cell containing `pos`, if inside the grid.
    pub fn cell_of(&self, pos: Point) -> Option<usize> {
        self.cell_coords(pos).map(|c| self.index(c))
    }

    /// True if `pos` lies inside the grid in a growable cell.
    pub fn is_growable(&self, pos: Point) -> bool {
        self.cell_of(pos).is_some_and(|i| self.growable[i])
    }

    /// Concentration of `layer` in the cell containing `pos`; 0 outside.
    pub fn value_at(&self, layer: Layer, pos: Point) -> f64 {
        self.cell_of(pos).map_or(0.0, |i| self.layer(layer)[i])
    }

    /// Finite-difference gradient (per mm) of `layer` at the cell containing
    /// `pos`. Central differences inside, one-sided at borders, zero outside.
    pub fn gradient(&self, layer: Layer, pos: Point) -> Point {
        let Some(c) = self.cell_coords(pos) else {
            return [0.0; 3];
        };
        let values = self.layer(layer);
        let mut g = [0.0; 3];
        for axis in 0..self.dim {
            let n = self.shape[axis];
            if n < 2 {
                continue;
            }
            let lo = c[axis].saturating_sub(1);
            let hi = (c[axis] + 1).min(n - 1);
            let mut a = c;
            let mut b = c;
            a[axis] = lo;
            b[axis] = hi;
            let span = (hi - lo) as f64 * self.cell_size;
            g[axis] = (values[self.index(b)] - values[self.index(a)]) / span;
        }
        g
    }
}
