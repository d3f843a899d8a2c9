//! Exact classical bound by enumeration of local deterministic strategies.
//!
//! Party `j` answers `m_j = t_j ⊕ r_j s_j`. The parity `z = ⊕ m_j` only
//! depends on the slope set `S = {j : r_j = 1}` and the global offset
//! `b = ⊕ t_j`, so the maximum is taken over the `2^(l+1)` classes `(b, S)`.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::boolfn::AnfPolynomial;
use crate::error::{Error, Result};
use crate::protocol::{ProtocolInstance, MAX_PARTIES};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rule {
    pub offset: bool,
    pub slope: bool,
}

impl Rule {
    pub fn answer(self, setting: bool) -> bool {
        self.offset ^ (self.slope & setting)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalStrategy {
    rules: Vec<Rule>,
}

impl LocalStrategy {
    pub fn new(rules: Vec<Rule>) -> Self {
        Self { rules }
    }

    /// Canonical representative `t = (b, 0, ..., 0)`, `r_j = [j ∈ S]`.
    pub fn from_class(class: StrategyClass, parties: usize) -> Self {
        let rules = (0..parties)
            .map(|j| Rule {
                offset: j == 0 && class.flip,
                slope: class.slopes >> j & 1 == 1,
            })
            .collect();
        Self { rules }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn parties(&self) -> usize {
        self.rules.len()
    }

    pub fn class(&self) -> StrategyClass {
        StrategyClass {
            flip: self.rules.iter().fold(false, |acc, r| acc ^ r.offset),
            slopes: self
                .rules
                .iter()
                .enumerate()
                .filter(|(_, r)| r.slope)
                .fold(0, |acc, (j, _)| acc | 1 << j),
        }
    }

    /// Parity of all answers for the packed setting `s`.
    pub fn parity(&self, setting: u32) -> bool {
        self.rules
            .iter()
            .enumerate()
            .fold(false, |acc, (j, r)| acc ^ r.answer(setting >> j & 1 == 1))
    }
}

/// Equivalence class `(b, S)` of deterministic strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StrategyClass {
    pub flip: bool,
    pub slopes: u32,
}

impl StrategyClass {
    /// The affine function of `x` the class computes:
    /// `g(x) = b ⊕ ⊕_{j ∈ S} s_j(x)`.
    pub fn induced_function(&self, inst: &ProtocolInstance) -> AnfPolynomial {
        let m = inst.matrix();
        let (linear, constant) = (0..m.parties())
            .filter(|j| self.slopes >> j & 1 == 1)
            .fold((0u32, self.flip), |(lin, c), j| {
                (lin ^ m.row_mask(j), c ^ (m.offset_mask() >> j & 1 == 1))
            });
        let mut masks: Vec<u32> = (0..m.cols())
            .filter(|k| linear >> k & 1 == 1)
            .map(|k| 1 << k)
            .collect();
        if constant {
            masks.push(0);
        }
        AnfPolynomial::from_masks(inst.arity(), masks).expect("row masks fit the arity")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalResult {
    pub bound: Rational,
    /// All maximizing classes ordered by `(b, S)`.
    pub classes: Vec<StrategyClass>,
    pub witnesses: Vec<LocalStrategy>,
    /// Affine function computed by the first witness.
    pub induced: AnfPolynomial,
}

fn check_size(inst: &ProtocolInstance, strat: &LocalStrategy) -> Result<()> {
    if strat.parties() != inst.parties() {
        return Err(Error::Dimension(alloc::format!(
            "strategy has {} parties, instance has {}",
            strat.parties(),
            inst.parties()
        )));
    }
    Ok(())
}

/// `Σ_x β(x) (-1)^{g(x)}` for the strategy's induced parity `g`.
pub fn strategy_value(inst: &ProtocolInstance, strat: &LocalStrategy) -> Result<Rational> {
    check_size(inst, strat)?;
    let beta = inst.functional();
    let mut total = Rational::zero();
    for idx in 0..1usize << inst.arity() {
        let c = beta.coefficient(idx);
        if strat.parity(inst.setting_of(idx)) {
            total -= c;
        } else {
            total += c;
        }
    }
    Ok(total)
}

/// Group coefficients scaled to integers over their common denominator.
struct ScaledGroups {
    settings: Vec<u32>,
    numerators: Vec<BigInt>,
    denominator: BigInt,
}

impl ScaledGroups {
    fn new(inst: &ProtocolInstance) -> Self {
        let groups = inst.settings_groups();
        let denominator = groups
            .iter()
            .fold(BigInt::one(), |d, g| d.lcm(g.coefficient.denom()));
        let numerators = groups
            .iter()
            .map(|g| g.coefficient.numer() * (&denominator / g.coefficient.denom()))
            .collect();
        Self {
            settings: groups.iter().map(|g| g.setting).collect(),
            numerators,
            denominator,
        }
    }

    /// Scaled value of the class `(0, S)` for every `S`.
    fn slope_values(&self, parties: usize) -> Vec<BigInt> {
        let small: Option<Vec<i128>> = self.numerators.iter().map(|n| n.to_i64().map(i128::from)).collect();
        let count = 1u32 << parties;
        match small {
            Some(nums) => (0..count)
                .map(|slopes| {
                    let v: i128 = self
                        .settings
                        .iter()
                        .zip(&nums)
                        .map(|(&s, &n)| if (s & slopes).count_ones() & 1 == 1 { -n } else { n })
                        .sum();
                    BigInt::from(v)
                })
                .collect(),
            None => (0..count)
                .map(|slopes| {
                    self.settings
                        .iter()
                        .zip(&self.numerators)
                        .map(|(&s, n)| if (s & slopes).count_ones() & 1 == 1 { -n } else { n.clone() })
                        .sum()
                })
                .collect(),
        }
    }
}

pub fn classical_bound(inst: &ProtocolInstance) -> Result<ClassicalResult> {
    let parties = inst.parties();
    if parties > MAX_PARTIES {
        return Err(Error::Cap {
            what: "party",
            found: parties,
            cap: MAX_PARTIES,
        });
    }
    let scaled = ScaledGroups::new(inst);
    let values = scaled.slope_values(parties);
    let best_pos = values.iter().max().cloned().unwrap_or_default();
    let best_neg = values.iter().map(|v| -v).max().unwrap_or_default();
    let best = best_pos.clone().max(best_neg.clone());

    let mut classes = Vec::new();
    for flip in [false, true] {
        for (slopes, v) in values.iter().enumerate() {
            let v = if flip { -v } else { v.clone() };
            if v == best {
                classes.push(StrategyClass {
                    flip,
                    slopes: slopes as u32,
                });
            }
        }
    }
    let witnesses = classes
        .iter()
        .map(|&c| LocalStrategy::from_class(c, parties))
        .collect();
    let induced = classes[0].induced_function(inst);
    Ok(ClassicalResult {
        bound: Rational::new(best, scaled.denominator),
        classes,
        witnesses,
        induced,
    })
}

/// True iff some local deterministic strategy computes `f` on every input
/// with nonzero weight.
pub fn is_deterministic_classical(inst: &ProtocolInstance) -> Result<bool> {
    Ok(classical_bound(inst)?.bound.is_one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::BooleanFunction;
    use crate::protocol::{paper_instance, ratio, InputDistribution, PreprocessMatrix};
    use alloc::vec;

    #[test]
    fn constant_zero_strategy_on_h3() {
        let inst = paper_instance("h3").unwrap();
        let strat = LocalStrategy::from_class(StrategyClass { flip: false, slopes: 0 }, 4);
        assert_eq!(strategy_value(&inst, &strat).unwrap(), ratio(-1, 2));
    }

    #[test]
    fn constant_one_strategy_on_nand2() {
        let inst = paper_instance("nand2").unwrap();
        let strat = LocalStrategy::new(vec![
            Rule { offset: false, slope: false },
            Rule { offset: true, slope: false },
            Rule { offset: false, slope: false },
            Rule { offset: false, slope: false },
        ]);
        assert_eq!(strategy_value(&inst, &strat).unwrap(), ratio(1, 2));
    }

    #[test]
    fn flipping_two_offsets_keeps_value() {
        let inst = paper_instance("or3").unwrap();
        let base = LocalStrategy::from_class(StrategyClass { flip: true, slopes: 0b0101 }, 4);
        let mut rules = base.rules().to_vec();
        rules[1].offset ^= true;
        rules[3].offset ^= true;
        let other = LocalStrategy::new(rules);
        assert_eq!(
            strategy_value(&inst, &base).unwrap(),
            strategy_value(&inst, &other).unwrap()
        );
    }

    #[test]
    fn strategy_size_mismatch() {
        let inst = paper_instance("h3").unwrap();
        let strat = LocalStrategy::from_class(StrategyClass { flip: false, slopes: 0 }, 3);
        assert!(strategy_value(&inst, &strat).is_err());
    }

    #[test]
    fn paper_bounds() {
        let expect = [
            ("h3", ratio(1, 2)),
            ("or3", ratio(4, 10)),
            ("nand2", ratio(1, 2)),
        ];
        for (name, c) in expect {
            let r = classical_bound(&paper_instance(name).unwrap()).unwrap();
            assert_eq!(r.bound, c, "{name}");
        }
    }

    #[test]
    fn witnesses_attain_bound_and_are_ordered() {
        for name in crate::protocol::PAPER_INSTANCES {
            let inst = paper_instance(name).unwrap();
            let r = classical_bound(&inst).unwrap();
            assert!(!r.witnesses.is_empty());
            for w in &r.witnesses {
                assert_eq!(strategy_value(&inst, w).unwrap(), r.bound);
            }
            assert!(r.classes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn induced_function_matches_parity() {
        let inst = paper_instance("or3").unwrap();
        let r = classical_bound(&inst).unwrap();
        for class in &r.classes {
            let g = class.induced_function(&inst);
            let strat = LocalStrategy::from_class(*class, 4);
            for idx in 0..8 {
                assert_eq!(g.eval_index(idx), strat.parity(inst.setting_of(idx)));
            }
        }
    }

    #[test]
    fn deterministic_examples() {
        let xor = ProtocolInstance::new(
            BooleanFunction::from_fn(2, |x| x[0] ^ x[1] == 1).unwrap(),
            InputDistribution::uniform(2).unwrap(),
            PreprocessMatrix::identity(2).unwrap(),
        )
        .unwrap();
        assert!(is_deterministic_classical(&xor).unwrap());
        assert!(!is_deterministic_classical(&paper_instance("h3").unwrap()).unwrap());

        let blind = ProtocolInstance::new(
            BooleanFunction::from_fn(2, |x| x[0] == 1).unwrap(),
            InputDistribution::uniform(2).unwrap(),
            PreprocessMatrix::new(&[vec![0, 1]], 2).unwrap(),
        )
        .unwrap();
        assert!(!is_deterministic_classical(&blind).unwrap());
    }
}
