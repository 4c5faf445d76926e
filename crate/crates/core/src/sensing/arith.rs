//! Adaptive order-0 arithmetic coder with 32-bit integer arithmetic.
//!
//! The coder keeps `[low, high]` in 32 bits and emits bits MSB first with the
//! usual pending-bit handling of straddling intervals. The model starts
//! every symbol at count 1 and adds 1 after each coded symbol; all counts
//! are halved (rounding up) whenever the total would exceed `MAX_TOTAL`.
//! Cumulative counts live in a Fenwick tree.

use crate::error::{Error, Result};

const TOP: u64 = (1 << 32) - 1;
const HALF: u64 = 1 << 31;
const QUARTER: u64 = 1 << 30;
const MAX_TOTAL: u64 = 1 << 24;

struct Model {
    tree: Vec<u64>,
    counts: Vec<u64>,
    total: u64,
}

impl Model {
    fn new(symbols: usize) -> Self {
        let mut m = Model {
            tree: vec![0; symbols + 1],
            counts: vec![0; symbols],
            total: 0,
        };
        m.reset_counts(|_| 1);
        m
    }

    fn reset_counts(&mut self, f: impl Fn(u64) -> u64) {
        let n = self.counts.len();
        self.tree.iter_mut().for_each(|v| *v = 0);
        self.total = 0;
        for i in 0..n {
            let c = f(self.counts[i]);
            self.counts[i] = c;
            self.total += c;
            self.tree[i + 1] += c;
            let parent = (i + 1) + ((i + 1) & (i + 1).wrapping_neg());
            if parent <= n {
                let v = self.tree[i + 1];
                self.tree[parent] += v;
            }
        }
    }

    /// Sum of counts of symbols `< s`.
    fn cum(&self, s: usize) -> u64 {
        let mut i = s;
        let mut acc = 0;
        while i > 0 {
            acc += self.tree[i];
            i &= i - 1;
        }
        acc
    }

    /// Symbol whose cumulative interval contains `target`.
    fn find(&self, target: u64) -> usize {
        let n = self.counts.len();
        let mut pos = 0;
        let mut rem = target;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= rem {
                pos = next;
                rem -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }

    fn update(&mut self, s: usize) {
        let n = self.counts.len();
        self.counts[s] += 1;
        self.total += 1;
        let mut i = s + 1;
        while i <= n {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
        if self.total > MAX_TOTAL {
            self.reset_counts(|c| c.div_ceil(2));
        }
    }
}

struct BitWriter {
    bytes: Vec<u8>,
    acc: u8,
    fill: u8,
}

impl BitWriter {
    fn push(&mut self, bit: bool) {
        self.acc = (self.acc << 1) | bit as u8;
        self.fill += 1;
        if self.fill == 8 {
            self.bytes.push(self.acc);
            self.acc = 0;
            self.fill = 0;
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.fill > 0 {
            self.bytes.push(self.acc << (8 - self.fill));
        }
        self.bytes
    }
}

fn check_alphabet(bits: u8) -> Result<usize> {
    if bits == 0 || bits > 16 {
        return Err(Error::invalid("entropy coder", format!("bits {bits} not in 1..=16")));
    }
    Ok(1usize << bits)
}

/// Codes `indices`, each `< 2^bits`.
pub fn encode(indices: &[u32], bits: u8) -> Result<Vec<u8>> {
    let symbols = check_alphabet(bits)?;
    let mut model = Model::new(symbols);
    let mut out = BitWriter {
        bytes: Vec::new(),
        acc: 0,
        fill: 0,
    };
    let (mut low, mut high, mut pending) = (0u64, TOP, 0u64);
    let emit = |out: &mut BitWriter, bit: bool, pending: &mut u64| {
        out.push(bit);
        for _ in 0..*pending {
            out.push(!bit);
        }
        *pending = 0;
    };
    for &i in indices {
        let s = i as usize;
        if s >= symbols {
            return Err(Error::invalid("entropy coder", format!("index {i} >= 2^{bits}")));
        }
        let range = high - low + 1;
        let (c0, c1, total) = (model.cum(s), model.cum(s) + model.counts[s], model.total);
        high = low + range * c1 / total - 1;
        low += range * c0 / total;
        loop {
            if high < HALF {
                emit(&mut out, false, &mut pending);
            } else if low >= HALF {
                emit(&mut out, true, &mut pending);
                low -= HALF;
                high -= HALF;
            } else if low >= QUARTER && high < 3 * QUARTER {
                pending += 1;
                low -= QUARTER;
                high -= QUARTER;
            } else {
                break;
            }
            low <<= 1;
            high = (high << 1) | 1;
        }
        model.update(s);
    }
    pending += 1;
    emit(&mut out, low >= QUARTER, &mut pending);
    Ok(out.finish())
}

/// Decodes `count` indices; bits past the end of `bytes` read as zero.
pub fn decode(bytes: &[u8], count: usize, bits: u8) -> Result<Vec<u32>> {
    let symbols = check_alphabet(bits)?;
    let mut model = Model::new(symbols);
    let mut pos = 0usize;
    let mut next_bit = || {
        let byte = bytes.get(pos / 8).copied().unwrap_or(0);
        let b = (byte >> (7 - pos % 8)) & 1;
        pos += 1;
        b as u64
    };
    let (mut low, mut high) = (0u64, TOP);
    let mut value = 0u64;
    for _ in 0..32 {
        value = (value << 1) | next_bit();
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let range = high - low + 1;
        let total = model.total;
        let target = ((value - low + 1) * total - 1) / range;
        if target >= total {
            return Err(Error::CorruptBitstream("arithmetic decoder out of range".into()));
        }
        let s = model.find(target);
        let c0 = model.cum(s);
        let c1 = c0 + model.counts[s];
        high = low + range * c1 / total - 1;
        low += range * c0 / total;
        loop {
            if high < HALF {
            } else if low >= HALF {
                low -= HALF;
                high -= HALF;
                value -= HALF;
            } else if low >= QUARTER && high < 3 * QUARTER {
                low -= QUARTER;
                high -= QUARTER;
                value -= QUARTER;
            } else {
                break;
            }
            low <<= 1;
            high = (high << 1) | 1;
            value = (value << 1) | next_bit();
        }
        if value < low || value > high {
            return Err(Error::CorruptBitstream("arithmetic decoder lost sync".into()));
        }
        out.push(s as u32);
        model.update(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn fenwick_matches_prefix_sums() {
        let mut m = Model::new(10);
        for s in [3, 3, 7, 0, 9, 3] {
            m.update(s);
        }
        let mut acc = 0;
        for s in 0..10 {
            assert_eq!(m.cum(s), acc);
            for t in acc..acc + m.counts[s] {
                assert_eq!(m.find(t), s);
            }
            acc += m.counts[s];
        }
        assert_eq!(acc, m.total);
    }

    #[test]
    fn constant_source_compresses() {
        let idx = vec![2u32; 5000];
        let bytes = encode(&idx, 4).unwrap();
        assert!(bytes.len() * 8 < 5000 * 4 / 20, "{} bytes", bytes.len());
        assert_eq!(decode(&bytes, idx.len(), 4).unwrap(), idx);
    }

    #[test]
    fn uniform_two_bit_source_costs_two_bits() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let idx: Vec<u32> = (0..20_000).map(|_| rng.gen_range(0..4)).collect();
        let bytes = encode(&idx, 2).unwrap();
        let rate = bytes.len() as f64 * 8.0 / idx.len() as f64;
        assert!((rate - 2.0).abs() < 0.1, "rate {rate}");
        assert_eq!(decode(&bytes, idx.len(), 2).unwrap(), idx);
    }

    #[test]
    fn rescaling_keeps_round_trip() {
        let idx: Vec<u32> = (0..(MAX_TOTAL as u32 / 2 + 10_000))
            .map(|i| (i % 3 == 0) as u32)
            .collect();
        let bytes = encode(&idx, 1).unwrap();
        assert_eq!(decode(&bytes, idx.len(), 1).unwrap(), idx);
    }

    #[test]
    fn out_of_alphabet_index_is_rejected() {
        assert!(encode(&[4], 2).is_err());
        assert!(encode(&[0], 0).is_err());
    }

    #[test]
    fn empty_sequence() {
        let bytes = encode(&[], 3).unwrap();
        assert!(decode(&bytes, 0, 3).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn round_trip(bits in 1u8..=10, seq in proptest::collection::vec(any::<u32>(), 0..400)) {
            let idx: Vec<u32> = seq.iter().map(|v| v % (1 << bits)).collect();
            let bytes = encode(&idx, bits).unwrap();
            prop_assert_eq!(decode(&bytes, idx.len(), bits).unwrap(), idx);
        }
    }
}
