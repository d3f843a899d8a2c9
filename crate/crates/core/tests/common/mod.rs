#![allow(dead_code)]

use nmqc_core::boolfn::BooleanFunction;
use nmqc_core::protocol::{InputDistribution, PreprocessMatrix, ProtocolInstance};
use nmqc_core::Rational;
use num_bigint::BigInt;
use rand::Rng;

/// Random instance with `n` input bits and `l` parties; weights are random
/// small integers over their sum, some of them zero.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, l: usize) -> ProtocolInstance {
    let table = (0..1 << n).map(|_| rng.gen::<bool>()).collect();
    let f = BooleanFunction::from_table(n, table).unwrap();
    let mut raw: Vec<i64> = (0..1 << n).map(|_| rng.gen_range(0..5)).collect();
    if raw.iter().all(|&w| w == 0) {
        raw[0] = 1;
    }
    let total: i64 = raw.iter().sum();
    let weights = raw
        .iter()
        .map(|&w| Rational::new(BigInt::from(w), BigInt::from(total)))
        .collect();
    let p = InputDistribution::new(n, weights).unwrap();
    let rows: Vec<Vec<u8>> = (0..l)
        .map(|_| (0..n).map(|_| rng.gen_range(0..2)).collect())
        .collect();
    let offset: Vec<u8> = (0..l).map(|_| rng.gen_range(0..2)).collect();
    let a = PreprocessMatrix::with_offset(&rows, n, &offset).unwrap();
    ProtocolInstance::new(f, p, a).unwrap()
}

pub fn random_angles<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-10.0..10.0)).collect()
}
