//! Cube unit emulation: square tile products with optional accumulation.

use crate::counters::WorkSpanCounters;
use crate::dtype::{Accum, Scalar, Storage};
use crate::error::{Error, Result};

pub const MAX_TILE_DIM: usize = 128;

/// Constant operand matrices kept resident in the cube unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstantKind {
    /// 1 on and above the diagonal.
    UpperOnes,
    /// 1 on and below the diagonal.
    LowerOnes,
    /// 1 strictly below the diagonal.
    StrictLowerOnes,
    AllOnes,
}

impl ConstantKind {
    fn entry(self, i: usize, j: usize) -> bool {
        match self {
            ConstantKind::UpperOnes => i <= j,
            ConstantKind::LowerOnes => i >= j,
            ConstantKind::StrictLowerOnes => i > j,
            ConstantKind::AllOnes => true,
        }
    }
}

/// An `s x s` row-major operand tile.
#[derive(Debug, Clone, PartialEq)]
pub struct TileMatrix<T> {
    s: usize,
    elems: Vec<T>,
}

impl<T: Scalar> TileMatrix<T> {
    pub fn from_elems(s: usize, elems: Vec<T>) -> Result<Self> {
        check_dim(s)?;
        if elems.len() != s * s {
            return Err(Error::LengthMismatch {
                expected: s * s,
                actual: elems.len(),
            });
        }
        Ok(TileMatrix { s, elems })
    }

    pub fn zeros(s: usize) -> Result<Self> {
        check_dim(s)?;
        Ok(TileMatrix {
            s,
            elems: vec![T::ZERO; s * s],
        })
    }

    pub fn dim(&self) -> usize {
        self.s
    }

    pub fn elems(&self) -> &[T] {
        &self.elems
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.elems[row * self.s + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.elems[row * self.s..(row + 1) * self.s]
    }
}

/// Wide-dtype output tile (the L0C accumulation buffer).
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulatorTile<A> {
    s: usize,
    elems: Vec<A>,
}

impl<A: Accum> AccumulatorTile<A> {
    pub fn zeros(s: usize) -> Result<Self> {
        check_dim(s)?;
        Ok(AccumulatorTile {
            s,
            elems: vec![A::ZERO; s * s],
        })
    }

    pub fn from_elems(s: usize, elems: Vec<A>) -> Result<Self> {
        check_dim(s)?;
        if elems.len() != s * s {
            return Err(Error::LengthMismatch {
                expected: s * s,
                actual: elems.len(),
            });
        }
        Ok(AccumulatorTile { s, elems })
    }

    pub fn dim(&self) -> usize {
        self.s
    }

    pub fn elems(&self) -> &[A] {
        &self.elems
    }

    pub fn into_elems(self) -> Vec<A> {
        self.elems
    }

    pub fn get(&self, row: usize, col: usize) -> A {
        self.elems[row * self.s + col]
    }

    /// Reloads the accumulator as a wide operand without narrowing.
    pub fn to_operand(&self) -> TileMatrix<A>
    where
        A: Scalar,
    {
        TileMatrix {
            s: self.s,
            elems: self.elems.clone(),
        }
    }
}

fn check_dim(s: usize) -> Result<()> {
    if s == 0 || s > MAX_TILE_DIM {
        return Err(Error::InvalidConfig(format!(
            "tile dimension {s} outside [1, {MAX_TILE_DIM}]"
        )));
    }
    Ok(())
}

pub fn make_constant<T: Scalar>(kind: ConstantKind, s: usize) -> Result<TileMatrix<T>> {
    check_dim(s)?;
    let mut elems = Vec::with_capacity(s * s);
    for i in 0..s {
        for j in 0..s {
            elems.push(if kind.entry(i, j) { T::ONE } else { T::ZERO });
        }
    }
    Ok(TileMatrix { s, elems })
}

/// Views up to `s*s` elements as a row-major tile, zero-padding the tail.
pub fn tile_view<T: Scalar>(segment: &[T], s: usize) -> Result<TileMatrix<T>> {
    check_dim(s)?;
    let len = s * s;
    if segment.len() > len {
        return Err(Error::LengthMismatch {
            expected: len,
            actual: segment.len(),
        });
    }
    let mut elems = Vec::with_capacity(len);
    elems.extend_from_slice(segment);
    elems.resize(len, T::ZERO);
    Ok(TileMatrix { s, elems })
}

/// `acc = a @ b`, or `acc += a @ b` when `accumulate` is set.
///
/// Every operand is widened before multiplying; each output entry sums its
/// `s` products in ascending `k` order.
pub fn matmul<T: Scalar>(
    a: &TileMatrix<T>,
    b: &TileMatrix<T>,
    acc: &mut AccumulatorTile<T::Acc>,
    accumulate: bool,
    counters: &mut WorkSpanCounters,
) -> Result<()> {
    let s = a.s;
    if b.s != s || acc.s != s {
        return Err(Error::DimensionMismatch(format!(
            "a is {s}x{s}, b is {0}x{0}, acc is {1}x{1}",
            b.s, acc.s
        )));
    }
    let wa: Vec<T::Acc> = a.elems.iter().map(|v| v.widen()).collect();
    let wb: Vec<T::Acc> = b.elems.iter().map(|v| v.widen()).collect();

    let mut product = vec![T::Acc::ZERO; s * s];
    for i in 0..s {
        let out = &mut product[i * s..(i + 1) * s];
        for k in 0..s {
            let aik = wa[i * s + k];
            let brow = &wb[k * s..(k + 1) * s];
            for (o, &bkj) in out.iter_mut().zip(brow) {
                *o = *o + aik * bkj;
            }
        }
    }

    if accumulate {
        for (c, p) in acc.elems.iter_mut().zip(product) {
            *c = *c + p;
        }
    } else {
        acc.elems = product;
    }
    counters.record_matmul();
    Ok(())
}

/// Copies an accumulator tile out to storage precision.
pub fn narrow<S: Storage>(acc: &AccumulatorTile<S::Acc>) -> Result<TileMatrix<S>> {
    let elems = acc
        .elems
        .iter()
        .map(|&v| S::narrow(v))
        .collect::<Result<Vec<_>>>()?;
    Ok(TileMatrix { s: acc.s, elems })
}
