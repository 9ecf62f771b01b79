//! Seeded random instances: DS sequences by random acceptance, random
//! blockings and random interval partitions.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::sequence::{greedy_partition, BlockedSequence, Sequence, Sym};

/// Name of the generator, reported in output headers.
pub const PRNG_NAME: &str = "ChaCha8";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random order-`s` DS sequence over at most `n` symbols and of length at
/// most `len`: symbols are drawn uniformly and kept when the sequence stays
/// repetition-free and of order at most `s`. Stops after `len` acceptances
/// or `20 * len` consecutive rejections.
pub fn random_ds_sequence<R: Rng>(rng: &mut R, n: usize, s: usize, len: usize) -> Sequence {
    let mut out: Vec<Sym> = Vec::with_capacity(len);
    if n == 0 {
        return Sequence::new(out);
    }
    let mut runs = vec![0u16; n * n];
    let mut last = vec![u32::MAX; n * n];
    let limit = (s + 1) as u16;
    let mut fails = 0;
    while out.len() < len && fails < 20 * len.max(1) {
        let c = rng.gen_range(0..n);
        let ok = out.last() != Some(&(c as Sym))
            && (0..n).all(|y| y == c || last[c * n + y] == c as u32 || runs[c * n + y] < limit);
        if !ok {
            fails += 1;
            continue;
        }
        fails = 0;
        for y in 0..n {
            if y != c && last[c * n + y] != c as u32 {
                for idx in [c * n + y, y * n + c] {
                    runs[idx] += 1;
                    last[idx] = c as u32;
                }
            }
        }
        out.push(c as Sym);
    }
    Sequence::new(out)
}

/// Cuts `s` into blocks of distinct symbols: every cut the greedy
/// partition needs, plus each other gap with probability `extra`. Keeps at
/// most `max_blocks` blocks.
pub fn random_blocking<R: Rng>(rng: &mut R, s: &[Sym], extra: f64, max_blocks: usize) -> BlockedSequence {
    let greedy = greedy_partition(s, None);
    let mut out = BlockedSequence::empty();
    let mut cur: Vec<Sym> = Vec::new();
    for blk in greedy.blocks() {
        for (i, &x) in blk.iter().enumerate() {
            if i > 0 && rng.gen_bool(extra) {
                if out.num_blocks() == max_blocks {
                    return out;
                }
                out.push_block_unchecked(&cur);
                cur.clear();
            }
            cur.push(x);
        }
        if out.num_blocks() == max_blocks {
            return out;
        }
        out.push_block_unchecked(&cur);
        cur.clear();
    }
    out
}

/// A random blocked order-`s` DS sequence with at most `n` symbols and
/// between 2 and `max_blocks` blocks.
pub fn random_ds_blocked<R: Rng>(rng: &mut R, n: usize, s: usize, max_blocks: usize) -> BlockedSequence {
    loop {
        let len = rng.gen_range(2..=4 * n * (s + 1));
        let seq = random_ds_sequence(rng, n, s, len);
        let extra = rng.gen_range(0.0..0.5);
        let b = random_blocking(rng, seq.as_slice(), extra, max_blocks);
        if b.num_blocks() >= 2 {
            return b;
        }
    }
}

/// Random positive widths summing to `m`.
pub fn random_widths<R: Rng>(rng: &mut R, m: usize) -> Vec<usize> {
    let mut widths = Vec::new();
    let mut left = m;
    while left > 0 {
        let w = rng.gen_range(1..=left);
        widths.push(w);
        left -= w;
    }
    widths
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::ds_order;

    #[test]
    fn generated_sequences_have_the_requested_order() {
        let mut r = rng(7);
        for s in 1..6 {
            for _ in 0..50 {
                let seq = random_ds_sequence(&mut r, 6, s, 60);
                assert!(ds_order(seq.as_slice()) <= s);
                assert!(!seq.has_repetition());
            }
        }
    }

    #[test]
    fn blocks_are_bounded_and_distinct() {
        let mut r = rng(3);
        for _ in 0..100 {
            let b = random_ds_blocked(&mut r, 8, 4, 32);
            assert!((2..=32).contains(&b.num_blocks()));
            for blk in b.blocks() {
                let mut v = blk.to_vec();
                v.sort_unstable();
                v.dedup();
                assert_eq!(v.len(), blk.len());
            }
        }
    }

    #[test]
    fn widths_sum() {
        let mut r = rng(1);
        for m in 1..40 {
            assert_eq!(random_widths(&mut r, m).iter().sum::<usize>(), m);
        }
    }

    #[test]
    fn same_seed_same_output() {
        let a = random_ds_sequence(&mut rng(9), 10, 3, 100);
        let b = random_ds_sequence(&mut rng(9), 10, 3, 100);
        assert_eq!(a, b);
    }
}
