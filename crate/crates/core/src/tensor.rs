//! Dense labeled tensors with pairwise contraction over shared labels.
//!
//! Entries are stored row-major with the first label most significant.

use num_traits::Num;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<T> {
    labels: Vec<usize>,
    dims: Vec<usize>,
    data: Vec<T>,
}

impl<T: Copy + Num> DenseTensor<T> {
    pub fn new(labels: Vec<usize>, dims: Vec<usize>, data: Vec<T>) -> Result<Self> {
        if labels.len() != dims.len() {
            return Err(Error::ShapeMismatch(format!("{} labels but {} dims", labels.len(), dims.len())));
        }
        let size: usize = dims.iter().product();
        if size != data.len() {
            return Err(Error::ShapeMismatch(format!("dims {dims:?} need {size} entries, got {}", data.len())));
        }
        let mut sorted = labels.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::ShapeMismatch(format!("repeated label in {labels:?}")));
        }
        Ok(DenseTensor { labels, dims, data })
    }

    pub fn scalar(value: T) -> Self {
        DenseTensor { labels: Vec::new(), dims: Vec::new(), data: vec![value] }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    /// The single entry of a rank-0 tensor.
    pub fn value(&self) -> Option<T> {
        (self.rank() == 0).then(|| self.data[0])
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    /// Sum over all shared labels. Result labels are the remaining ones in
    /// ascending order.
    pub fn contract(&self, other: &Self) -> Result<Self> {
        let (sa, sb) = (self.strides(), other.strides());
        // (label, dim, stride in self, stride in other)
        let mut free = Vec::new();
        let mut shared = Vec::new();
        for (i, &l) in self.labels.iter().enumerate() {
            match other.labels.iter().position(|&m| m == l) {
                Some(j) => {
                    if self.dims[i] != other.dims[j] {
                        return Err(Error::ShapeMismatch(format!(
                            "label {l} has dim {} and {}",
                            self.dims[i], other.dims[j]
                        )));
                    }
                    shared.push((l, self.dims[i], sa[i], sb[j]));
                }
                None => free.push((l, self.dims[i], sa[i], 0)),
            }
        }
        for (j, &l) in other.labels.iter().enumerate() {
            if !self.labels.contains(&l) {
                free.push((l, other.dims[j], 0, sb[j]));
            }
        }
        free.sort_by_key(|f| f.0);

        let out_size: usize = free.iter().map(|f| f.1).product();
        let inner_size: usize = shared.iter().map(|f| f.1).product();
        let mut data = Vec::with_capacity(out_size);
        let mut out_digits = vec![0usize; free.len()];
        let mut inner_digits = vec![0usize; shared.len()];
        let (mut base_a, mut base_b) = (0usize, 0usize);
        for _ in 0..out_size {
            let mut acc = T::zero();
            let (mut ia, mut ib) = (base_a, base_b);
            for _ in 0..inner_size {
                acc = acc + self.data[ia] * other.data[ib];
                advance(&mut inner_digits, &shared, &mut ia, &mut ib);
            }
            data.push(acc);
            advance(&mut out_digits, &free, &mut base_a, &mut base_b);
        }
        Ok(DenseTensor {
            labels: free.iter().map(|f| f.0).collect(),
            dims: free.iter().map(|f| f.1).collect(),
            data,
        })
    }
}

/// Odometer step over `axes` (last axis fastest), keeping both flat offsets in sync.
fn advance(digits: &mut [usize], axes: &[(usize, usize, usize, usize)], ia: &mut usize, ib: &mut usize) {
    for k in (0..axes.len()).rev() {
        let (_, dim, stride_a, stride_b) = axes[k];
        digits[k] += 1;
        *ia += stride_a;
        *ib += stride_b;
        if digits[k] < dim {
            return;
        }
        digits[k] = 0;
        *ia -= stride_a * dim;
        *ib -= stride_b * dim;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_product_as_contraction() {
        // A_{0,1} = [[1,2],[3,4]], B_{1,2} = [[5,6],[7,8]]
        let a = DenseTensor::new(vec![0, 1], vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = DenseTensor::new(vec![1, 2], vec![2, 2], vec![5.0, 6.0, 7.0, 8.0]).unwrap();
        let c = a.contract(&b).unwrap();
        assert_eq!(c.labels(), &[0, 2]);
        assert_eq!(c.data(), &[19.0, 22.0, 43.0, 50.0]);
    }

    #[test]
    fn outer_product_and_full_trace() {
        let a = DenseTensor::new(vec![3], vec![2], vec![1.0, 2.0]).unwrap();
        let b = DenseTensor::new(vec![1], vec![3], vec![1.0, 10.0, 100.0]).unwrap();
        let ab = a.contract(&b).unwrap();
        assert_eq!(ab.labels(), &[1, 3]);
        assert_eq!(ab.data(), &[1.0, 2.0, 10.0, 20.0, 100.0, 200.0]);
        let s = ab.contract(&ab).unwrap();
        assert_eq!(s.value(), Some(1.0 + 4.0 + 100.0 + 400.0 + 10000.0 + 40000.0));
    }

    #[test]
    fn mismatched_dims_rejected() {
        let a = DenseTensor::new(vec![0], vec![2], vec![1.0, 2.0]).unwrap();
        let b = DenseTensor::new(vec![0], vec![3], vec![1.0, 2.0, 3.0]).unwrap();
        assert!(a.contract(&b).is_err());
        assert!(DenseTensor::new(vec![0, 0], vec![1, 1], vec![1.0]).is_err());
    }
}
