//! Boolean functions `f: {0,1}^n -> {0,1}` as truth tables, and their
//! algebraic normal form over GF(2).
//!
//! Inputs are indexed with `x_1` as the least significant bit:
//! `idx(x) = sum_k x_k * 2^(k-1)`. Every module in this crate uses the same
//! convention.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Largest supported number of input bits.
pub const MAX_ARITY: usize = 16;

/// Table position of the bit tuple `x = (x_1, ..., x_n)`.
pub fn input_index(x: &[u8]) -> usize {
    x.iter()
        .enumerate()
        .fold(0, |acc, (k, &bit)| acc | (usize::from(bit & 1) << k))
}

/// Bit tuple `(x_1, ..., x_n)` stored at table position `idx`.
pub fn input_bits(idx: usize, arity: usize) -> Vec<u8> {
    (0..arity).map(|k| ((idx >> k) & 1) as u8).collect()
}

/// Table positions in lexicographic order of `(x_1, ..., x_n)`, i.e.
/// `000, 001, 010, ...` when written as `x_1 x_2 x_3`.
pub fn lexicographic_indices(arity: usize) -> impl Iterator<Item = usize> {
    (0..1usize << arity).map(move |k| reverse_bits(k, arity))
}

fn reverse_bits(k: usize, width: usize) -> usize {
    (0..width).fold(0, |acc, b| acc | (((k >> b) & 1) << (width - 1 - b)))
}

/// Renders an input as the bit string `x_1 x_2 ... x_n`.
pub fn bit_string(idx: usize, width: usize) -> String {
    (0..width)
        .map(|k| if (idx >> k) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Parses a bit string `x_1 x_2 ... x_n` back into a table position.
pub fn parse_bit_string(s: &str) -> Option<usize> {
    let mut idx = 0usize;
    for (k, c) in s.chars().enumerate() {
        match c {
            '0' => {}
            '1' => idx |= 1 << k,
            _ => return None,
        }
    }
    Some(idx)
}

fn check_arity(arity: usize) -> Result<()> {
    if arity == 0 || arity > MAX_ARITY {
        return Err(Error::ArityOutOfRange(arity));
    }
    Ok(())
}

/// Truth table of a Boolean function on `arity` bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    arity: usize,
    table: Vec<bool>,
}

impl BooleanFunction {
    pub fn from_table(arity: usize, table: Vec<bool>) -> Result<Self> {
        check_arity(arity)?;
        if table.len() != 1 << arity {
            return Err(Error::TableLength {
                expected: 1 << arity,
                found: table.len(),
            });
        }
        Ok(Self { arity, table })
    }

    /// Parses a `'0'`/`'1'` string indexed by `idx(x)`.
    pub fn from_table_str(arity: usize, bits: &str) -> Result<Self> {
        let table = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidArgument(alloc::format!(
                    "truth table character {other:?} is not 0 or 1"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_table(arity, table)
    }

    pub fn from_fn(arity: usize, f: impl Fn(&[u8]) -> bool) -> Result<Self> {
        check_arity(arity)?;
        let table = (0..1usize << arity)
            .map(|idx| f(&input_bits(idx, arity)))
            .collect();
        Ok(Self { arity, table })
    }

    pub fn constant(arity: usize, value: bool) -> Result<Self> {
        check_arity(arity)?;
        Ok(Self {
            arity,
            table: alloc::vec![value; 1 << arity],
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    /// Value at table position `idx`.
    pub fn at(&self, idx: usize) -> bool {
        self.table[idx]
    }

    pub fn eval(&self, x: &[u8]) -> Result<bool> {
        if x.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: x.len(),
            });
        }
        Ok(self.table[input_index(x)])
    }

    pub fn table_string(&self) -> String {
        self.table.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// `f(x) xor 1`.
    pub fn negated(&self) -> Self {
        Self {
            arity: self.arity,
            table: self.table.iter().map(|b| !b).collect(),
        }
    }

    pub fn to_anf(&self) -> AnfPolynomial {
        let mut coeffs = self.table.clone();
        moebius_in_place(&mut coeffs);
        AnfPolynomial {
            arity: self.arity,
            monomials: coeffs
                .iter()
                .enumerate()
                .filter(|(_, &c)| c)
                .map(|(mask, _)| mask as u32)
                .collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.to_anf().degree()
    }

    /// True for affine functions (ANF degree at most one).
    pub fn is_linear(&self) -> bool {
        self.degree() <= 1
    }
}

/// Binary Möbius transform over GF(2); its own inverse.
fn moebius_in_place(values: &mut [bool]) {
    let n = values.len();
    let mut half = 1;
    while half < n {
        for block in (0..n).step_by(2 * half) {
            for i in block..block + half {
                values[i + half] ^= values[i];
            }
        }
        half <<= 1;
    }
}

/// XOR of monomials; each monomial is a bitmask over variables
/// (bit `k-1` set means `x_k` appears), and the empty mask is the constant 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnfPolynomial {
    arity: usize,
    monomials: BTreeSet<u32>,
}

impl AnfPolynomial {
    /// Builds a polynomial from monomials given as 1-based variable index lists.
    /// Repeated monomials cancel, as they do over GF(2).
    pub fn new<I, M>(arity: usize, monomials: I) -> Result<Self>
    where
        I: IntoIterator<Item = M>,
        M: AsRef<[usize]>,
    {
        check_arity(arity)?;
        let mut set = BTreeSet::new();
        for monomial in monomials {
            let mut mask = 0u32;
            for &index in monomial.as_ref() {
                if index == 0 || index > arity {
                    return Err(Error::MonomialIndex { index, arity });
                }
                mask |= 1 << (index - 1);
            }
            if !set.insert(mask) {
                set.remove(&mask);
            }
        }
        Ok(Self {
            arity,
            monomials: set,
        })
    }

    pub fn from_masks(arity: usize, masks: impl IntoIterator<Item = u32>) -> Result<Self> {
        check_arity(arity)?;
        let mut set = BTreeSet::new();
        for mask in masks {
            if mask >> arity != 0 {
                return Err(Error::MonomialIndex {
                    index: (32 - mask.leading_zeros()) as usize,
                    arity,
                });
            }
            if !set.insert(mask) {
                set.remove(&mask);
            }
        }
        Ok(Self {
            arity,
            monomials: set,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn masks(&self) -> impl Iterator<Item = u32> + '_ {
        self.monomials.iter().copied()
    }

    /// Monomials as sorted 1-based index lists.
    pub fn monomials(&self) -> Vec<Vec<usize>> {
        self.monomials.iter().map(|&m| mask_indices(m)).collect()
    }

    pub fn contains(&self, indices: &[usize]) -> bool {
        let mask = indices.iter().fold(0u32, |m, &i| m | 1 << (i - 1));
        self.monomials.contains(&mask)
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.monomials
            .iter()
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn eval_index(&self, idx: usize) -> bool {
        let idx = idx as u32;
        self.monomials
            .iter()
            .fold(false, |acc, &m| acc ^ (idx & m == m))
    }

    pub fn to_function(&self) -> BooleanFunction {
        let mut table = alloc::vec![false; 1 << self.arity];
        for &m in &self.monomials {
            table[m as usize] = true;
        }
        moebius_in_place(&mut table);
        BooleanFunction {
            arity: self.arity,
            table,
        }
    }
}

fn mask_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect()
}

impl fmt::Display for AnfPolynomial {
    /// Renders e.g. `x1x2 ⊕ x3 ⊕ 1`, highest degree first; `0` when empty.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return f.write_str("0");
        }
        let mut terms: Vec<u32> = self.monomials.iter().copied().collect();
        terms.sort_by(|a, b| {
            b.count_ones()
                .cmp(&a.count_ones())
                .then_with(|| mask_indices(*a).cmp(&mask_indices(*b)))
        });
        let rendered: Vec<String> = terms
            .iter()
            .map(|&m| {
                if m == 0 {
                    "1".to_string()
                } else {
                    mask_indices(m)
                        .iter()
                        .map(|i| alloc::format!("x{i}"))
                        .collect()
                }
            })
            .collect();
        f.write_str(&rendered.join(" ⊕ "))
    }
}

/// The functions used by the bundled instances.
pub fn builtin(name: &str) -> Result<BooleanFunction> {
    match name {
        "h3" => BooleanFunction::from_fn(3, |x| !(x[0] == x[1] && x[1] == x[2])),
        "or3" => BooleanFunction::from_fn(3, |x| x.contains(&1)),
        "or3_x1x3" => {
            BooleanFunction::from_fn(3, |x| x.contains(&1) ^ (x[0] & x[2] == 1))
        }
        "nand2" => BooleanFunction::from_fn(2, |x| x[0] & x[1] == 0),
        other => Err(Error::UnknownInstance(other.to_string())),
    }
}
