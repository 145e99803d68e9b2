//! Space-time grid on the circle `[0, J)` with the time step locked to the
//! cell width, plus a dense row-major container for field histories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest spatial resolution the harness will allocate.
pub const MAX_NX: usize = 1 << 16;

/// Uniform periodic grid with `dt = dx = J / nx` (CFL number exactly one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    length: f64,
    nx: usize,
    nt: usize,
}

impl GridSpec {
    pub fn new(length: f64, nx: usize, nt: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Config(format!("circle length must be positive, got {length}")));
        }
        if nx < 8 {
            return Err(Error::Config(format!("nx must be at least 8, got {nx}")));
        }
        if nx > MAX_NX {
            return Err(Error::MemoryGuard(nx));
        }
        if nt < 1 {
            return Err(Error::Config("nt must be at least 1".into()));
        }
        Ok(Self { length, nx, nt })
    }

    /// Builds a grid whose horizon is an integer number of steps; rejects
    /// horizons that do not land on the time lattice.
    pub fn with_horizon(length: f64, nx: usize, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Config(format!("horizon must be positive, got {horizon}")));
        }
        let dx = length / nx as f64;
        let steps = horizon / dx;
        let nt = steps.round();
        if (steps - nt).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::Config(format!(
                "horizon {horizon} is not a multiple of dt = {dx} (cfl is locked to 1)"
            )));
        }
        Self::new(length, nx, nt as usize)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn dx(&self) -> f64 {
        self.length / self.nx as f64
    }

    pub fn dt(&self) -> f64 {
        self.dx()
    }

    pub fn cfl(&self) -> f64 {
        1.0
    }

    pub fn horizon(&self) -> f64 {
        self.nt as f64 * self.dt()
    }

    pub fn cell_area(&self) -> f64 {
        self.dt() * self.dx()
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt()
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    /// Reduces a signed node index onto `0..nx`.
    pub fn wrap(&self, j: isize) -> usize {
        j.rem_euclid(self.nx as isize) as usize
    }

    /// The same circle and horizon with each cell split `2^levels` times in
    /// both directions.
    pub fn refined(&self, levels: u32) -> Result<Self> {
        let factor = 1usize << levels;
        let nx = self.nx.checked_mul(factor).ok_or(Error::MemoryGuard(usize::MAX))?;
        if nx > MAX_NX {
            return Err(Error::MemoryGuard(nx));
        }
        Self::new(self.length, nx, self.nt * factor)
    }

    /// Same grid with a different number of steps.
    pub fn with_steps(&self, nt: usize) -> Result<Self> {
        Self::new(self.length, self.nx, nt)
    }
}

/// Row-major `rows x cols` array of reals. Rows are time levels, columns
/// are spatial nodes or cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2 {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Field2 {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape {
                expected: format!("{rows}x{cols} = {}", rows * cols),
                found: data.len().to_string(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for n in 0..rows {
            for j in 0..cols {
                data.push(f(n, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, n: usize, j: usize) -> f64 {
        self.data[n * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, n: usize, j: usize, value: f64) {
        self.data[n * self.cols + j] = value;
    }

    /// Periodic access in the column index.
    #[inline]
    pub fn get_wrapped(&self, n: usize, j: isize) -> f64 {
        let j = j.rem_euclid(self.cols as isize) as usize;
        self.get(n, j)
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.data[n * self.cols..(n + 1) * self.cols]
    }

    pub fn row_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.data[n * self.cols..(n + 1) * self.cols]
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::Shape { expected: self.cols.to_string(), found: row.len().to_string() });
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn same_shape(&self, other: &Field2) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }
}

/// Recorded solver field: row `n` holds `u(n dt, j dx)` for every node `j`.
pub type FieldHistory = Field2;
