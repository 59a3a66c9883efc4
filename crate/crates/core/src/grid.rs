//! Uniform grids over a ball and the sampled functions living on them.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Geometry of a uniform isotropic grid. Axis `d` has samples at
/// `center[d] + (i - (shape[d]-1)/2) h`, so `center` is the middle of the
/// grid and also the centre of the domain ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub shape: Vec<usize>,
    pub spacing: f64,
    pub center: Vec<f64>,
    pub domain_radius: f64,
}

impl GridSpec {
    /// Cube `[-half_width, half_width]^dim` with `points` samples per axis and
    /// the inscribed ball as domain.
    pub fn cube(dim: usize, points: usize, half_width: f64) -> Result<Self> {
        if points < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 points per axis; got {points}")));
        }
        let spec = GridSpec {
            dim,
            shape: vec![points; dim],
            spacing: 2.0 * half_width / (points - 1) as f64,
            center: vec![0.0; dim],
            domain_radius: half_width,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::InvalidGrid(format!("dim must be 1, 2 or 3; got {}", self.dim)));
        }
        if self.shape.len() != self.dim || self.center.len() != self.dim {
            return Err(Error::InvalidGrid("shape and center must have dim entries".into()));
        }
        if self.shape.iter().any(|&s| s < 3) {
            return Err(Error::InvalidGrid(format!("every axis needs at least 3 samples; got {:?}", self.shape)));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive; got {}", self.spacing)));
        }
        if !(self.domain_radius > 0.0) || self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGrid("domain radius must be positive and center finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major multi-index of flat index `flat` (last axis fastest).
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for d in (0..self.dim).rev() {
            idx[d] = flat % self.shape[d];
            flat /= self.shape[d];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &s)| acc * s + i)
    }

    /// Coordinates of flat index `flat`; unused trailing entries are zero.
    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut x = [0.0; 3];
        for d in 0..self.dim {
            x[d] = self.center[d] + (idx[d] as f64 - 0.5 * (self.shape[d] - 1) as f64) * self.spacing;
        }
        x
    }

    /// Coordinates relative to `center`.
    pub fn offset(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut x = [0.0; 3];
        for d in 0..self.dim {
            x[d] = (idx[d] as f64 - 0.5 * (self.shape[d] - 1) as f64) * self.spacing;
        }
        x
    }

    /// Distance from `center`.
    pub fn radius(&self, flat: usize) -> f64 {
        let o = self.offset(flat);
        (o[0] * o[0] + o[1] * o[1] + o[2] * o[2]).sqrt()
    }

    fn inside_radius(&self, radius: f64, flat: usize) -> bool {
        self.radius(flat) <= radius + 1e-9 * self.spacing
    }

    /// Whether a sample lies in the closed domain ball.
    pub fn inside(&self, flat: usize) -> bool {
        self.inside_radius(self.domain_radius, flat)
    }

    /// Whether a sample lies in the closed ball of radius `radius` about `center`.
    pub fn within(&self, radius: f64, flat: usize) -> bool {
        self.inside_radius(radius, flat)
    }

    /// Flat indices of the samples inside the domain ball, in row-major order.
    pub fn domain_points(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.inside(i)).collect()
    }

    /// Measure of one grid cell, `hⁿ`.
    pub fn cell_measure(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Whether `flat` has a full set of axis neighbours inside the domain.
    pub fn is_interior(&self, flat: usize) -> bool {
        let idx = self.unravel(flat);
        for d in 0..self.dim {
            if idx[d] == 0 || idx[d] + 1 == self.shape[d] {
                return false;
            }
            let mut n = idx;
            n[d] -= 1;
            if !self.inside(self.ravel(&n[..self.dim])) {
                return false;
            }
            n[d] += 2;
            if !self.inside(self.ravel(&n[..self.dim])) {
                return false;
            }
        }
        true
    }
}

/// Scalar samples on a [`GridSpec`], row-major, last axis fastest.
/// Samples outside the domain ball are ignored and may be NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        let g = GridFunction { spec, values };
        g.validate()?;
        Ok(g)
    }

    /// Sample `f` at every grid point inside the domain; NaN outside.
    pub fn from_fn(spec: GridSpec, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        spec.validate()?;
        let values = (0..spec.len())
            .map(|i| if spec.inside(i) { f(&spec.coords(i)[..spec.dim]) } else { f64::NAN })
            .collect();
        Self::new(spec, values)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.values.len() != self.spec.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values for shape {:?}; got {}",
                self.spec.len(),
                self.spec.shape,
                self.values.len()
            )));
        }
        if let Some(i) = (0..self.values.len()).find(|&i| self.spec.inside(i) && !self.values[i].is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value at index {i} inside the domain")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.spec.clone(), values)
    }

    /// Load a grid from its JSON header. The `payload` key holds either the
    /// values inline as an array (nulls read as NaN), the string `"inline"`
    /// with the array under `values`, or the path of a raw little-endian f64
    /// file resolved relative to the header.
    pub fn load(header: &Path) -> Result<Self> {
        let text = fs::read_to_string(header)?;
        let mut doc: serde_json::Map<String, Value> = serde_json::from_str(&text)?;
        let payload = doc.remove("payload").ok_or_else(|| Error::InvalidGrid("missing payload".into()))?;
        let inline_values = doc.remove("values");
        let spec: GridSpec = serde_json::from_value(Value::Object(doc))?;
        spec.validate()?;
        let values = match payload {
            Value::Array(items) => json_values(&items)?,
            Value::String(s) if s == "inline" => match inline_values {
                Some(Value::Array(items)) => json_values(&items)?,
                _ => return Err(Error::InvalidGrid("inline payload needs a values array".into())),
            },
            Value::String(name) => {
                let base = header.parent().map(Path::to_path_buf).unwrap_or_default();
                read_sidecar(&base.join(name), spec.len())?
            }
            _ => return Err(Error::InvalidGrid("payload must be an array or a file name".into())),
        };
        Self::new(spec, values)
    }

    /// Write the header with the values inline.
    pub fn save_inline(&self, header: &Path) -> Result<()> {
        let mut doc = serde_json::to_value(&self.spec)?;
        let vals: Vec<Value> = self.values.iter().map(|&v| if v.is_finite() { Value::from(v) } else { Value::Null }).collect();
        doc["payload"] = Value::Array(vals);
        fs::write(header, serde_json::to_string(&doc)?)?;
        Ok(())
    }

    /// Write the header plus a binary sidecar named `sidecar` next to it.
    pub fn save_with_sidecar(&self, header: &Path, sidecar: &str) -> Result<()> {
        let mut doc = serde_json::to_value(&self.spec)?;
        doc["payload"] = Value::from(sidecar);
        let base = header.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut f = fs::File::create(base.join(sidecar))?;
        let mut buf = Vec::with_capacity(8 * self.values.len());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        f.write_all(&buf)?;
        fs::write(header, serde_json::to_string_pretty(&doc)?)?;
        Ok(())
    }

    /// SHA-256 over the grid geometry and the raw value bytes.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&self.spec).unwrap_or_default());
        for v in &self.values {
            h.update(v.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// `max - min` over the domain samples.
    pub fn oscillation(&self) -> f64 {
        let (lo, hi) = self
            .spec
            .domain_points()
            .into_iter()
            .map(|i| self.values[i])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi >= lo {
            hi - lo
        } else {
            0.0
        }
    }
}

fn json_values(items: &[Value]) -> Result<Vec<f64>> {
    items
        .iter()
        .map(|v| match v {
            Value::Null => Ok(f64::NAN),
            other => other.as_f64().ok_or_else(|| Error::InvalidGrid(format!("non-numeric payload entry {other}"))),
        })
        .collect()
}

fn read_sidecar(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * expected {
        return Err(Error::InvalidGrid(format!(
            "sidecar {} holds {} bytes; expected {}",
            path.display(),
            bytes.len(),
            8 * expected
        )));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect())
}
