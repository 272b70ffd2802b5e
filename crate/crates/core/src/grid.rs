//! Dense n-dimensional grids stored row-major (last axis contiguous).

use std::fmt;

use crate::error::{param_err, shape_err, Result};

/// Storage precision of a grid's samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    F32,
    F64,
}

impl ElementKind {
    pub fn name(self) -> &'static str {
        match self {
            ElementKind::F32 => "f32",
            ElementKind::F64 => "f64",
        }
    }

    /// Size of one sample in bytes.
    pub fn width(self) -> usize {
        match self {
            ElementKind::F32 => 4,
            ElementKind::F64 => 8,
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ElementKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f32" => Ok(ElementKind::F32),
            "f64" => Ok(ElementKind::F64),
            other => Err(param_err!(
                "unknown element kind {other:?} (expected f32 or f64)"
            )),
        }
    }
}

/// A real sample type a grid can hold.
pub trait Sample:
    Copy + PartialEq + PartialOrd + Default + Send + Sync + fmt::Debug + 'static
{
    const KIND: ElementKind;

    fn to_f64(self) -> f64;
    fn from_f64(v: f64) -> Self;
}

impl Sample for f32 {
    const KIND: ElementKind = ElementKind::F32;

    #[inline(always)]
    fn to_f64(self) -> f64 {
        self as f64
    }

    #[inline(always)]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
}

impl Sample for f64 {
    const KIND: ElementKind = ElementKind::F64;

    #[inline(always)]
    fn to_f64(self) -> f64 {
        self
    }

    #[inline(always)]
    fn from_f64(v: f64) -> Self {
        v
    }
}

/// Dense n-dimensional array with row-major layout.
///
/// `data.len()` always equals the product of `shape`, and every extent is at
/// least one.
#[derive(Clone, PartialEq)]
pub struct Grid<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("shape", &self.shape)
            .field("len", &self.data.len())
            .finish()
    }
}

/// Validates `shape` and returns the element count.
pub(crate) fn checked_len(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() {
        return Err(shape_err!("shape must have at least one axis"));
    }
    if let Some(axis) = shape.iter().position(|&e| e == 0) {
        return Err(shape_err!("extent of axis {axis} is zero"));
    }
    shape
        .iter()
        .try_fold(1usize, |acc, &e| acc.checked_mul(e))
        .ok_or_else(|| shape_err!("shape {shape:?} overflows the address space"))
}

/// Row-major strides (in elements) for `shape`.
pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for d in (0..shape.len().saturating_sub(1)).rev() {
        strides[d] = strides[d + 1] * shape[d + 1];
    }
    strides
}

impl<T> Grid<T> {
    /// Wraps `values` as a grid of the given shape.
    pub fn new(shape: impl Into<Vec<usize>>, values: Vec<T>) -> Result<Self> {
        let shape = shape.into();
        let len = checked_len(&shape)?;
        if values.len() != len {
            return Err(shape_err!(
                "shape {shape:?} holds {len} elements but {} values were given",
                values.len()
            ));
        }
        Ok(Grid {
            shape,
            data: values,
        })
    }

    pub fn from_fn(shape: impl Into<Vec<usize>>, mut f: impl FnMut(usize) -> T) -> Result<Self> {
        let shape = shape.into();
        let len = checked_len(&shape)?;
        Ok(Grid {
            shape,
            data: (0..len).map(&mut f).collect(),
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// Always false: grids have at least one element.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.shape)
    }

    /// Flat offset of a multi-index, or `None` if it is out of bounds.
    pub fn offset(&self, index: &[usize]) -> Option<usize> {
        if index.len() != self.shape.len() {
            return None;
        }
        let mut off = 0;
        for (&i, &e) in index.iter().zip(&self.shape) {
            if i >= e {
                return None;
            }
            off = off * e + i;
        }
        Some(off)
    }

    pub fn get(&self, index: &[usize]) -> Option<&T> {
        self.offset(index).map(|o| &self.data[o])
    }

    pub fn get_mut(&mut self, index: &[usize]) -> Option<&mut T> {
        self.offset(index).map(move |o| &mut self.data[o])
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            shape: self.shape.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    pub(crate) fn ensure_same_shape<U>(&self, other: &Grid<U>) -> Result<()> {
        if self.shape != other.shape {
            return Err(shape_err!(
                "grid shapes differ: {:?} vs {:?}",
                self.shape,
                other.shape
            ));
        }
        Ok(())
    }
}

impl<T: Sample> Grid<T> {
    pub fn kind(&self) -> ElementKind {
        T::KIND
    }

    /// Converts every sample to double precision.
    pub fn to_f64(&self) -> Grid<f64> {
        self.map(|v| v.to_f64())
    }
}

impl<T> std::ops::Index<&[usize]> for Grid<T> {
    type Output = T;

    fn index(&self, index: &[usize]) -> &T {
        self.get(index)
            .unwrap_or_else(|| panic!("index {index:?} out of bounds for shape {:?}", self.shape))
    }
}

/// Element-wise product `a[i] * b[i]`.
pub fn elementwise_product<T>(a: &Grid<T>, b: &Grid<T>) -> Result<Grid<T>>
where
    T: Copy + std::ops::Mul<Output = T>,
{
    a.ensure_same_shape(b)?;
    Ok(Grid {
        shape: a.shape.clone(),
        data: a.data.iter().zip(&b.data).map(|(&p, &q)| p * q).collect(),
    })
}

/// How missing samples are recognised and what undefined outputs hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissingPolicy {
    /// A sample `v` is missing iff `v <= missing_threshold`.
    pub missing_threshold: f64,
    /// Written wherever a correlation is undefined.
    pub fill_value: f64,
}

impl Default for MissingPolicy {
    fn default() -> Self {
        MissingPolicy {
            missing_threshold: -999.0,
            fill_value: -2.0,
        }
    }
}

impl MissingPolicy {
    /// Builds a policy whose fill value cannot be confused with a correlation.
    pub fn new(missing_threshold: f64, fill_value: f64) -> Result<Self> {
        let policy = MissingPolicy {
            missing_threshold,
            fill_value,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if self.missing_threshold.is_nan() || self.fill_value.is_nan() {
            return Err(param_err!(
                "missing threshold and fill value must not be NaN"
            ));
        }
        let distinguishable =
            self.fill_value <= self.missing_threshold || self.fill_value.abs() > 1.0;
        if !distinguishable {
            return Err(param_err!(
                "fill value {} lies inside [-1, 1] and above the missing threshold {}",
                self.fill_value,
                self.missing_threshold
            ));
        }
        Ok(())
    }

    #[inline(always)]
    pub fn is_missing(&self, v: f64) -> bool {
        v <= self.missing_threshold
    }
}

/// 1 where a sample is missing under `policy`, 0 elsewhere.
pub fn missing_mask<T: Sample>(g: &Grid<T>, policy: &MissingPolicy) -> Grid<u8> {
    g.map(|&v| policy.is_missing(v.to_f64()) as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_layout() {
        let g = Grid::new([2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(g[&[1, 0][..]], 3.0);
        assert_eq!(g.get(&[0, 1]), Some(&2.0));
        assert_eq!(g.get(&[2, 0]), None);
        assert_eq!(g.strides(), vec![2, 1]);
    }

    #[test]
    fn one_dimensional_grid() {
        let g = Grid::new([3], vec![5.0f32, 5.0, 5.0]).unwrap();
        assert_eq!(g.ndim(), 1);
        assert_eq!(g.kind(), ElementKind::F32);
    }

    #[test]
    fn length_mismatch_is_a_shape_error() {
        let err = Grid::new([2, 3], vec![0.0; 5]).unwrap_err();
        assert!(matches!(err, crate::Error::Shape(_)), "{err}");
        assert!(Grid::<f64>::new(Vec::new(), vec![]).is_err());
        assert!(Grid::<f64>::new([0, 3], vec![]).is_err());
    }

    #[test]
    fn products() {
        let a = Grid::new([3], vec![1.0, 2.0, 3.0]).unwrap();
        let b = Grid::new([3], vec![4.0, 5.0, 6.0]).unwrap();
        assert_eq!(
            elementwise_product(&a, &b).unwrap().as_slice(),
            &[4.0, 10.0, 18.0]
        );

        let sq = Grid::new([2], vec![2.0, 3.0]).unwrap();
        assert_eq!(
            elementwise_product(&sq, &sq).unwrap().as_slice(),
            &[4.0, 9.0]
        );

        let a = Grid::new([2], vec![0.0, -1.0]).unwrap();
        let b = Grid::new([2], vec![7.0, 7.0]).unwrap();
        assert_eq!(
            elementwise_product(&a, &b).unwrap().as_slice(),
            &[0.0, -7.0]
        );

        let c = Grid::new([2, 1], vec![7.0, 7.0]).unwrap();
        assert!(elementwise_product(&a, &c).is_err());
    }

    #[test]
    fn missing_mask_is_inclusive() {
        let p = MissingPolicy::default();
        let g = Grid::new([3], vec![-1000.0, 0.0, -999.0]).unwrap();
        assert_eq!(missing_mask(&g, &p).as_slice(), &[1, 0, 1]);
        let g = Grid::new([3], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(missing_mask(&g, &p).as_slice(), &[0, 0, 0]);
        let g = Grid::new([1], vec![-998.9]).unwrap();
        assert_eq!(missing_mask(&g, &p).as_slice(), &[0]);
    }

    #[test]
    fn policy_rejects_ambiguous_fill() {
        assert!(MissingPolicy::new(-999.0, -2.0).is_ok());
        assert!(MissingPolicy::new(-999.0, -1000.0).is_ok());
        assert!(MissingPolicy::new(-999.0, 0.5).is_err());
        assert!(MissingPolicy::new(f64::NAN, -2.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn product_commutes(v in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..64)) {
                let (a, b): (Vec<_>, Vec<_>) = v.into_iter().unzip();
                let n = a.len();
                let a = Grid::new([n], a).unwrap();
                let b = Grid::new([n], b).unwrap();
                let ab = elementwise_product(&a, &b).unwrap();
                let ba = elementwise_product(&b, &a).unwrap();
                for (p, q) in ab.as_slice().iter().zip(ba.as_slice()) {
                    prop_assert_eq!(p.to_bits(), q.to_bits());
                }
            }

            #[test]
            fn mask_is_binary(v in prop::collection::vec(-2000f64..10.0, 1..64)) {
                let n = v.len();
                let g = Grid::new([n], v).unwrap();
                let m = missing_mask(&g, &MissingPolicy::default());
                prop_assert!(m.as_slice().iter().all(|&b| b == 0 || b == 1));
            }

            #[test]
            fn flat_round_trip(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
                let values: Vec<f64> = (0..rows * cols).map(|i| (seed.wrapping_mul(i as u64 + 1) % 1000) as f64).collect();
                let g = Grid::new([rows, cols], values.clone()).unwrap();
                prop_assert_eq!(g.into_vec(), values);
            }
        }
    }
}
