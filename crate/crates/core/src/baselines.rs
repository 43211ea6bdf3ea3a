//! Real-valued comparison schemes: circular-convolution HRR and tensor-product
//! binding. Generic over the float type.

use std::sync::Arc;

use num_traits::{Float, FromPrimitive};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftNum, FftPlanner};

use crate::error::{Error, Result};

/// Scalar usable by the baselines.
pub trait Scalar: Float + FftNum + FromPrimitive {}

impl<T: Float + FftNum + FromPrimitive> Scalar for T {}

#[derive(Clone, Debug, PartialEq)]
pub struct RealVector<T> {
    pub components: Vec<T>,
}

impl<T: Scalar> RealVector<T> {
    pub fn new(components: Vec<T>) -> Self {
        RealVector { components }
    }

    pub fn zeros(dim: usize) -> Self {
        RealVector {
            components: vec![T::zero(); dim],
        }
    }

    /// iid `N(0, 1/dim)` entries.
    pub fn random_normal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self
    where
        StandardNormal: Distribution<T>,
    {
        let sd = T::one() / T::from_usize(dim).expect("dimension fits the scalar").sqrt();
        let normal = Normal::new(T::zero(), sd).expect("positive standard deviation");
        RealVector {
            components: (0..dim).map(|_| normal.sample(rng)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn dot(&self, other: &Self) -> T {
        self.components
            .iter()
            .zip(&other.components)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    /// Zero when either side is the zero vector.
    pub fn cosine(&self, other: &Self) -> T {
        let denom = self.norm() * other.norm();
        if denom == T::zero() {
            T::zero()
        } else {
            self.dot(other) / denom
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(RealVector {
            components: self.components.iter().zip(&other.components).map(|(&a, &b)| a + b).collect(),
        })
    }

    pub fn scale(&self, k: T) -> Self {
        RealVector {
            components: self.components.iter().map(|&a| a * k).collect(),
        }
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

/// FFT plans for one HRR dimension.
pub struct Hrr<T: Scalar> {
    dim: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Scalar> Hrr<T> {
    pub fn new(dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        Hrr {
            dim,
            forward: planner.plan_fft_forward(dim),
            inverse: planner.plan_fft_inverse(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn spectrum(&self, v: &RealVector<T>) -> Vec<Complex<T>> {
        let mut buf: Vec<Complex<T>> = v.components.iter().map(|&x| Complex::new(x, T::zero())).collect();
        self.forward.process(&mut buf);
        buf
    }

    fn real_inverse(&self, mut buf: Vec<Complex<T>>) -> RealVector<T> {
        self.inverse.process(&mut buf);
        let n = T::from_usize(self.dim).expect("dimension fits the scalar");
        RealVector {
            components: buf.into_iter().map(|c| c.re / n).collect(),
        }
    }

    fn check(&self, v: &RealVector<T>) -> Result<()> {
        check_dims(self.dim, v.dim())
    }

    /// Circular convolution `(r * f)[k] = sum_j r[j] f[k - j]`.
    pub fn bind(&self, r: &RealVector<T>, f: &RealVector<T>) -> Result<RealVector<T>> {
        self.check(r)?;
        self.check(f)?;
        let (rs, fs) = (self.spectrum(r), self.spectrum(f));
        Ok(self.real_inverse(rs.iter().zip(&fs).map(|(a, b)| a * b).collect()))
    }

    /// Circular correlation `y[k] = sum_j r[j] b[j + k]`, the approximate
    /// inverse of `bind`.
    pub fn unbind(&self, b: &RealVector<T>, r: &RealVector<T>) -> Result<RealVector<T>> {
        self.check(b)?;
        self.check(r)?;
        let (bs, rs) = (self.spectrum(b), self.spectrum(r));
        Ok(self.real_inverse(bs.iter().zip(&rs).map(|(b, r)| b * r.conj()).collect()))
    }

    pub fn bundle(&self, pairs: &[(RealVector<T>, RealVector<T>)]) -> Result<RealVector<T>> {
        let mut acc = RealVector::zeros(self.dim);
        for (r, f) in pairs {
            acc = acc.add(&self.bind(r, f)?)?;
        }
        Ok(acc)
    }
}

/// Dense tensor, row-major, first index outermost.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorRep<T> {
    pub dims: Vec<usize>,
    pub components: Vec<T>,
}

impl<T: Scalar> TensorRep<T> {
    pub fn from_vector(v: &RealVector<T>) -> Self {
        TensorRep {
            dims: vec![v.dim()],
            components: v.components.clone(),
        }
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn into_vector(self) -> Result<RealVector<T>> {
        if self.order() != 1 {
            return Err(Error::DimensionMismatch {
                left: 1,
                right: self.order(),
            });
        }
        Ok(RealVector::new(self.components))
    }
}

/// `r (x) f`.
pub fn tensor_bind<T: Scalar>(r: &RealVector<T>, f: &RealVector<T>) -> TensorRep<T> {
    tensor_bind_nested(r, &TensorRep::from_vector(f))
}

/// `r (x) t`: one more level of nesting.
pub fn tensor_bind_nested<T: Scalar>(r: &RealVector<T>, t: &TensorRep<T>) -> TensorRep<T> {
    let mut components = Vec::with_capacity(r.dim() * t.len());
    for &a in &r.components {
        components.extend(t.components.iter().map(|&b| a * b));
    }
    let mut dims = Vec::with_capacity(t.order() + 1);
    dims.push(r.dim());
    dims.extend_from_slice(&t.dims);
    TensorRep { dims, components }
}

/// Contracts the outermost index with `r`. Recovers the filler scaled by
/// `|r|^2`.
pub fn tensor_contract<T: Scalar>(t: &TensorRep<T>, r: &RealVector<T>) -> Result<TensorRep<T>> {
    if t.order() < 2 {
        return Err(Error::DimensionMismatch {
            left: 2,
            right: t.order(),
        });
    }
    check_dims(t.dims[0], r.dim())?;
    let inner = t.len() / t.dims[0];
    let mut out = vec![T::zero(); inner];
    for (i, &ri) in r.components.iter().enumerate() {
        for (o, &c) in out.iter_mut().zip(&t.components[i * inner..(i + 1) * inner]) {
            *o = *o + ri * c;
        }
    }
    Ok(TensorRep {
        dims: t.dims[1..].to_vec(),
        components: out,
    })
}

pub fn tensor_unbind<T: Scalar>(t: &TensorRep<T>, r: &RealVector<T>) -> Result<RealVector<T>> {
    tensor_contract(t, r)?.into_vector()
}

/// Component count of a structure nested `depth` levels deep over
/// dimension `dim`: `dim^(depth + 1)`. `None` on overflow.
pub fn nested_component_count(dim: usize, depth: u32) -> Option<u128> {
    (dim as u128).checked_pow(depth + 1)
}
