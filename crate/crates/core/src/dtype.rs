//! Storage and accumulation scalar types of the emulated engines.
//!
//! The cube unit consumes narrow storage scalars (`f16`, `i8`) and produces
//! wide accumulators (`f32`, `i32`). Wide scalars are themselves valid
//! operands, which is how a wide intermediate such as a row-sum tile is fed
//! back into a second product without narrowing.

use std::fmt::{self, Debug, Display};
use std::ops::{Add, Mul};

use half::f16;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StorageType {
    F16,
    I8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccumType {
    F32,
    I32,
}

/// A storage dtype paired with the dtype its products accumulate in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ElementType {
    pub storage: StorageType,
    pub accum: AccumType,
}

impl ElementType {
    pub const F16: ElementType = ElementType {
        storage: StorageType::F16,
        accum: AccumType::F32,
    };
    pub const I8: ElementType = ElementType {
        storage: StorageType::I8,
        accum: AccumType::I32,
    };

    pub fn name(&self) -> &'static str {
        match self.storage {
            StorageType::F16 => "f16",
            StorageType::I8 => "i8",
        }
    }
}

impl Display for ElementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Wide accumulation scalar (`i32` or `f32`). Accumulators are also valid
/// operands and widen to themselves.
pub trait Accum:
    Scalar<Acc = Self> + PartialOrd + Add<Output = Self> + Mul<Output = Self>
{
}

impl Accum for i32 {}
impl Accum for f32 {}

/// Any scalar an engine can load: narrow storage or wide accumulator values.
pub trait Scalar: Copy + Default + PartialEq + Debug + Send + Sync + 'static {
    type Acc: Accum;
    const ZERO: Self;
    const ONE: Self;
    const NAME: &'static str;

    fn widen(self) -> Self::Acc;
    /// Addition in this scalar's own dtype (integers wrap, `f16` rounds to
    /// nearest even).
    fn add_same(self, rhs: Self) -> Self;
    fn neg_same(self) -> Self;
    fn to_f64(self) -> f64;
}

impl Scalar for i8 {
    type Acc = i32;
    const ZERO: Self = 0;
    const ONE: Self = 1;
    const NAME: &'static str = "i8";

    fn widen(self) -> i32 {
        self as i32
    }
    fn add_same(self, rhs: Self) -> Self {
        self.wrapping_add(rhs)
    }
    fn neg_same(self) -> Self {
        self.wrapping_neg()
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f16 {
    type Acc = f32;
    const ZERO: Self = f16::ZERO;
    const ONE: Self = f16::ONE;
    const NAME: &'static str = "f16";

    fn widen(self) -> f32 {
        self.to_f32()
    }
    fn add_same(self, rhs: Self) -> Self {
        f16::from_f32(self.to_f32() + rhs.to_f32())
    }
    fn neg_same(self) -> Self {
        -self
    }
    fn to_f64(self) -> f64 {
        f64::from(self)
    }
}

impl Scalar for i32 {
    type Acc = i32;
    const ZERO: Self = 0;
    const ONE: Self = 1;
    const NAME: &'static str = "i32";

    fn widen(self) -> i32 {
        self
    }
    fn add_same(self, rhs: Self) -> Self {
        self.wrapping_add(rhs)
    }
    fn neg_same(self) -> Self {
        self.wrapping_neg()
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f32 {
    type Acc = f32;
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    const NAME: &'static str = "f32";

    fn widen(self) -> f32 {
        self
    }
    fn add_same(self, rhs: Self) -> Self {
        self + rhs
    }
    fn neg_same(self) -> Self {
        -self
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

/// Narrow storage dtypes accepted as kernel inputs.
pub trait Storage: Scalar {
    const DTYPE: ElementType;

    /// Converts a wide accumulator value back to storage (L0C copy-out).
    fn narrow(acc: Self::Acc) -> Result<Self>;
}

impl Storage for i8 {
    const DTYPE: ElementType = ElementType::I8;

    fn narrow(_acc: i32) -> Result<Self> {
        Err(Error::UnsupportedConversion {
            from: "i32",
            to: "i8",
        })
    }
}

impl Storage for f16 {
    const DTYPE: ElementType = ElementType::F16;

    fn narrow(acc: f32) -> Result<Self> {
        Ok(f16::from_f32(acc))
    }
}
