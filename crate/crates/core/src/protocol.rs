//! The computation instance: linear pre-processing `s = (A x ⊕ b)`, the input
//! distribution `p(x)`, and the Bell functional `β(x) = p(x)(-1)^f(x)`.

use alloc::string::ToString;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::boolfn::{self, bit_string, lexicographic_indices, BooleanFunction};
use crate::error::{Error, Result};
use crate::Rational;

/// Cap on the number of parties for setting enumeration.
pub const MAX_PARTIES: usize = 24;

/// Binary `l x n` matrix with an optional offset vector; party `j` receives
/// `s_j = (⊕_k a_jk x_k) ⊕ b_j`.
///
/// Settings are packed as bitmasks with `s_j` at bit `j-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessMatrix {
    cols: usize,
    rows: Vec<u32>,
    offset: u32,
}

impl PreprocessMatrix {
    pub fn new(rows: &[Vec<u8>], cols: usize) -> Result<Self> {
        Self::with_offset(rows, cols, &[])
    }

    /// `offset` may be empty (all zero) or have one bit per row.
    pub fn with_offset(rows: &[Vec<u8>], cols: usize, offset: &[u8]) -> Result<Self> {
        if rows.is_empty() || cols == 0 {
            return Err(Error::Dimension("matrix needs at least one row and one column".into()));
        }
        if cols > boolfn::MAX_ARITY {
            return Err(Error::ArityOutOfRange(cols));
        }
        if rows.len() > MAX_PARTIES {
            return Err(Error::Cap {
                what: "party",
                found: rows.len(),
                cap: MAX_PARTIES,
            });
        }
        if !offset.is_empty() && offset.len() != rows.len() {
            return Err(Error::Dimension(alloc::format!(
                "offset has {} entries for {} rows",
                offset.len(),
                rows.len()
            )));
        }
        let mut masks = Vec::with_capacity(rows.len());
        for (j, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension(alloc::format!(
                    "row {} has length {}, expected {}",
                    j + 1,
                    row.len(),
                    cols
                )));
            }
            masks.push(pack_bits(row)?);
        }
        Ok(Self {
            cols,
            rows: masks,
            offset: pack_bits(offset)?,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let rows: Vec<Vec<u8>> = (0..n)
            .map(|j| (0..n).map(|k| u8::from(j == k)).collect())
            .collect();
        Self::new(&rows, n)
    }

    pub fn parties(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row `j` (0-based) as a mask over input bits.
    pub fn row_mask(&self, j: usize) -> u32 {
        self.rows[j]
    }

    pub fn offset_mask(&self) -> u32 {
        self.offset
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|&m| (0..self.cols).map(|k| (m >> k & 1) as u8).collect())
            .collect()
    }

    pub fn offset(&self) -> Vec<u8> {
        (0..self.parties()).map(|j| (self.offset >> j & 1) as u8).collect()
    }

    /// Setting mask for the input at table position `idx`.
    pub fn apply_index(&self, idx: usize) -> u32 {
        let x = idx as u32;
        self.rows
            .iter()
            .enumerate()
            .fold(self.offset, |s, (j, &row)| s ^ (((row & x).count_ones() & 1) << j))
    }

    pub fn preprocess(&self, x: &[u8]) -> Result<Vec<u8>> {
        if x.len() != self.cols {
            return Err(Error::ArityMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        let s = self.apply_index(boolfn::input_index(x));
        Ok((0..self.parties()).map(|j| (s >> j & 1) as u8).collect())
    }
}

fn pack_bits(bits: &[u8]) -> Result<u32> {
    bits.iter().enumerate().try_fold(0u32, |acc, (k, &b)| match b {
        0 => Ok(acc),
        1 => Ok(acc | 1 << k),
        other => Err(Error::InvalidArgument(alloc::format!("entry {other} is not a bit"))),
    })
}

/// Exact probability weights over `{0,1}^n`, stored in table order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputDistribution {
    arity: usize,
    weights: Vec<Rational>,
}

impl InputDistribution {
    pub fn new(arity: usize, weights: Vec<Rational>) -> Result<Self> {
        if arity == 0 || arity > boolfn::MAX_ARITY {
            return Err(Error::ArityOutOfRange(arity));
        }
        if weights.len() != 1 << arity {
            return Err(Error::TableLength {
                expected: 1 << arity,
                found: weights.len(),
            });
        }
        if let Some(idx) = weights.iter().position(|w| w.is_negative()) {
            return Err(Error::NegativeWeight(bit_string(idx, arity)));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::NotNormalized(total.to_string()));
        }
        Ok(Self { arity, weights })
    }

    /// Sparse construction; inputs not listed get weight zero.
    pub fn from_entries(
        arity: usize,
        entries: impl IntoIterator<Item = (usize, Rational)>,
    ) -> Result<Self> {
        if arity == 0 || arity > boolfn::MAX_ARITY {
            return Err(Error::ArityOutOfRange(arity));
        }
        let mut weights = alloc::vec![Rational::zero(); 1 << arity];
        for (idx, w) in entries {
            if idx >= weights.len() {
                return Err(Error::Dimension(alloc::format!(
                    "input index {idx} out of range for arity {arity}"
                )));
            }
            weights[idx] = w;
        }
        Self::new(arity, weights)
    }

    pub fn uniform(arity: usize) -> Result<Self> {
        if arity == 0 || arity > boolfn::MAX_ARITY {
            return Err(Error::ArityOutOfRange(arity));
        }
        let w = Rational::new(BigInt::one(), BigInt::from(1u64 << arity));
        Self::new(arity, alloc::vec![w; 1 << arity])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn weight(&self, idx: usize) -> &Rational {
        &self.weights[idx]
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }
}

/// Coefficients `β(x) = p(x)(-1)^f(x)` in table order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellFunctional {
    arity: usize,
    coefficients: Vec<Rational>,
}

impl BellFunctional {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn coefficient(&self, idx: usize) -> &Rational {
        &self.coefficients[idx]
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    /// `Σ_x β(x)`: the value of the constant strategy `z = 0`.
    pub fn total(&self) -> Rational {
        self.coefficients.iter().sum()
    }

    pub fn l1_norm(&self) -> Rational {
        self.coefficients.iter().map(|c| c.abs()).sum()
    }
}

pub fn functional(f: &BooleanFunction, p: &InputDistribution) -> Result<BellFunctional> {
    if f.arity() != p.arity() {
        return Err(Error::ArityMismatch {
            expected: f.arity(),
            found: p.arity(),
        });
    }
    let coefficients = p
        .weights()
        .iter()
        .zip(f.table())
        .map(|(w, &fx)| if fx { -w.clone() } else { w.clone() })
        .collect();
    Ok(BellFunctional {
        arity: f.arity(),
        coefficients,
    })
}

/// All inputs mapped to one measurement setting, with their summed coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SettingGroup {
    pub setting: u32,
    pub coefficient: Rational,
    /// Table positions of the member inputs, in lexicographic order.
    pub inputs: Vec<usize>,
}

impl SettingGroup {
    pub fn setting_bits(&self, parties: usize) -> Vec<u8> {
        (0..parties).map(|j| (self.setting >> j & 1) as u8).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolInstance {
    function: BooleanFunction,
    distribution: InputDistribution,
    matrix: PreprocessMatrix,
    functional: BellFunctional,
}

impl ProtocolInstance {
    pub fn new(
        function: BooleanFunction,
        distribution: InputDistribution,
        matrix: PreprocessMatrix,
    ) -> Result<Self> {
        if matrix.cols() != function.arity() {
            return Err(Error::ArityMismatch {
                expected: function.arity(),
                found: matrix.cols(),
            });
        }
        let functional = functional(&function, &distribution)?;
        Ok(Self {
            function,
            distribution,
            matrix,
            functional,
        })
    }

    /// Same distribution and pre-processing, explicit coefficients.
    /// Only used for cross-checking literal coefficient lists.
    pub fn with_coefficients(&self, coefficients: Vec<Rational>) -> Result<Self> {
        if coefficients.len() != self.functional.coefficients.len() {
            return Err(Error::TableLength {
                expected: self.functional.coefficients.len(),
                found: coefficients.len(),
            });
        }
        let mut out = self.clone();
        out.functional.coefficients = coefficients;
        Ok(out)
    }

    pub fn function(&self) -> &BooleanFunction {
        &self.function
    }

    pub fn distribution(&self) -> &InputDistribution {
        &self.distribution
    }

    pub fn matrix(&self) -> &PreprocessMatrix {
        &self.matrix
    }

    pub fn functional(&self) -> &BellFunctional {
        &self.functional
    }

    pub fn arity(&self) -> usize {
        self.function.arity()
    }

    pub fn parties(&self) -> usize {
        self.matrix.parties()
    }

    pub fn setting_of(&self, idx: usize) -> u32 {
        self.matrix.apply_index(idx)
    }

    /// Groups inputs by setting, ordered by first appearance in
    /// lexicographic input order.
    pub fn settings_groups(&self) -> Vec<SettingGroup> {
        let mut groups: Vec<SettingGroup> = Vec::new();
        for idx in lexicographic_indices(self.arity()) {
            let setting = self.setting_of(idx);
            let coefficient = self.functional.coefficient(idx);
            match groups.iter_mut().find(|g| g.setting == setting) {
                Some(g) => {
                    g.coefficient += coefficient;
                    g.inputs.push(idx);
                }
                None => groups.push(SettingGroup {
                    setting,
                    coefficient: coefficient.clone(),
                    inputs: alloc::vec![idx],
                }),
            }
        }
        groups
    }
}

/// `p(z = f(x)) = (1 + β) / 2`.
pub fn success_probability(beta: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&beta) || beta.is_nan() {
        return Err(Error::BetaOutOfRange(beta));
    }
    Ok((1.0 + beta) / 2.0)
}

pub fn success_probability_exact(beta: &Rational) -> Rational {
    (Rational::one() + beta) / Rational::from_integer(BigInt::from(2))
}

/// Bundled instances: `h3`, `or3`, `or3_x1x3`, `nand2`.
pub fn paper_instance(name: &str) -> Result<ProtocolInstance> {
    let function = boolfn::builtin(name)?;
    let three_bit = || {
        PreprocessMatrix::new(
            &[
                alloc::vec![1, 0, 0],
                alloc::vec![0, 1, 0],
                alloc::vec![0, 0, 1],
                alloc::vec![1, 1, 1],
            ],
            3,
        )
    };
    let (distribution, matrix) = match name {
        "h3" => (InputDistribution::uniform(3)?, three_bit()?),
        "or3" => {
            let weights = (0..8)
                .map(|idx| if idx == 0 { ratio(3, 10) } else { ratio(1, 10) })
                .collect();
            (InputDistribution::new(3, weights)?, three_bit()?)
        }
        "or3_x1x3" => {
            let light = ["000", "001", "101", "111"];
            let weights = (0..8)
                .map(|idx| {
                    if light.contains(&bit_string(idx, 3).as_str()) {
                        ratio(1, 16)
                    } else {
                        ratio(3, 16)
                    }
                })
                .collect();
            (InputDistribution::new(3, weights)?, three_bit()?)
        }
        "nand2" => (
            InputDistribution::uniform(2)?,
            PreprocessMatrix::new(
                &[
                    alloc::vec![1, 0],
                    alloc::vec![0, 1],
                    alloc::vec![1, 1],
                    alloc::vec![0, 0],
                ],
                2,
            )?,
        ),
        other => return Err(Error::UnknownInstance(other.to_string())),
    };
    ProtocolInstance::new(function, distribution, matrix)
}

/// Names accepted by [`paper_instance`].
pub const PAPER_INSTANCES: [&str; 4] = ["h3", "or3", "or3_x1x3", "nand2"];

pub(crate) fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}
