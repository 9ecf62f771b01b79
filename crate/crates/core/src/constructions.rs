//! Composition, shuffling and the order-4 / order-5 lower-bound sequences.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{invalid, limit, Error, Result};
use crate::sequence::{canonicalize, canonicalize_blocked, BlockedSequence, Occurrences, Sym};

/// Default cap on generated sequence length.
pub const DEFAULT_MAX_SYMBOLS: u64 = 10_000_000;

/// Largest intermediate integer, in bits, that `predict_stats` will build.
const MAX_BITS: u64 = 1 << 24;

/// `[0 1 .. j-1][j-1 .. 1 0]`.
pub fn s2(j: usize) -> BlockedSequence {
    let up: Vec<Sym> = (0..j as Sym).collect();
    let down: Vec<Sym> = up.iter().rev().copied().collect();
    BlockedSequence::from_blocks([up, down]).expect("s2 blocks are distinct")
}

fn alphabet_size(b: &BlockedSequence) -> usize {
    b.flat().iter().map(|&x| x as usize + 1).max().unwrap_or(0)
}

fn require_canonical(b: &BlockedSequence, what: &str) -> Result<()> {
    if canonicalize(b.flat()) != b.flat() {
        return invalid(format!("{what} must be in canonical form"));
    }
    Ok(())
}

/// Appends a copy of `mid` over the alphabet `beta` (symbol `t` maps to
/// `beta[t]`; symbols beyond `beta` are dropped, empty blocks kept).
fn substitute_into(out: &mut BlockedSequence, mid: &BlockedSequence, beta: &[Sym]) {
    let mut blk = Vec::new();
    for mb in mid.blocks() {
        blk.clear();
        blk.extend(mb.iter().filter(|&&t| (t as usize) < beta.len()).map(|&t| beta[t as usize]));
        out.push_block_unchecked(&blk);
    }
}

/// `top ∘ mid`: every block of `top` is replaced by a copy of `mid`.
pub fn compose(top: &BlockedSequence, mid: &BlockedSequence) -> Result<BlockedSequence> {
    require_canonical(mid, "middle sequence")?;
    let j = alphabet_size(mid);
    if top.blocks().any(|b| b.len() > j) {
        return invalid(format!("top blocks must have length at most {j}"));
    }
    let mut out = BlockedSequence::empty();
    for beta in top.blocks() {
        substitute_into(&mut out, mid, beta);
    }
    Ok(out)
}

/// Three-fold composition: first, middle and last symbols of every block of
/// `top` are substituted by copies of `f`, `m` and `l` respectively.
pub fn compose3(
    top: &BlockedSequence,
    f: &BlockedSequence,
    m: &BlockedSequence,
    l: &BlockedSequence,
) -> Result<BlockedSequence> {
    for (x, name) in [(f, "first"), (m, "middle"), (l, "last")] {
        require_canonical(x, name)?;
    }
    let j = alphabet_size(f);
    if alphabet_size(m) != j || alphabet_size(l) != j {
        return invalid("the three middle sequences need equal alphabets");
    }
    if top.blocks().any(|b| b.len() > j) {
        return invalid(format!("top blocks must have length at most {j}"));
    }
    let n = alphabet_size(top);
    let mut first_block = vec![usize::MAX; n];
    let mut last_block = vec![0usize; n];
    for (k, b) in top.blocks().enumerate() {
        for &x in b {
            let x = x as usize;
            if first_block[x] == usize::MAX {
                first_block[x] = k;
            }
            last_block[x] = k;
        }
    }
    let mut out = BlockedSequence::empty();
    let (mut bf, mut bm, mut bl) = (Vec::new(), Vec::new(), Vec::new());
    for (k, b) in top.blocks().enumerate() {
        bf.clear();
        bm.clear();
        bl.clear();
        for &x in b {
            let (fb, lb) = (first_block[x as usize], last_block[x as usize]);
            if fb == lb {
                return invalid(format!("symbol {x} occurs in only one block of the top sequence"));
            }
            if fb == k {
                bf.push(x);
            } else if lb == k {
                bl.push(x);
            } else {
                bm.push(x);
            }
        }
        substitute_into(&mut out, f, &bf);
        substitute_into(&mut out, m, &bm);
        substitute_into(&mut out, l, &bl);
    }
    Ok(out)
}

/// Re-blocks a sequence into consecutive blocks of length `width`.
pub fn reblock(b: &BlockedSequence, width: usize) -> Result<BlockedSequence> {
    if width == 0 || b.len() % width != 0 {
        return invalid(format!("length {} is not a multiple of {width}", b.len()));
    }
    BlockedSequence::from_blocks(b.flat().chunks(width))
}

/// `sub ◇ bot`: the `k`-th symbol of the `l`-th block of `sub` is appended
/// to the `k`-th block of the `l`-th fresh copy of `bot`.
pub fn shuffle(sub: &BlockedSequence, bot: &BlockedSequence) -> Result<BlockedSequence> {
    let jb = bot.num_blocks();
    if sub.blocks().any(|b| b.len() > jb) {
        return invalid(format!("sub blocks must have length at most {jb}"));
    }
    let sub = canonicalize_blocked(sub);
    let bot = canonicalize_blocked(bot);
    let nsub = alphabet_size(&sub) as u64;
    let nbot = alphabet_size(&bot) as u64;
    let total = nsub + nbot * sub.num_blocks() as u64;
    if total > u32::MAX as u64 {
        return limit("alphabet exceeds 32-bit symbol ids");
    }
    let mut out = BlockedSequence::empty();
    let mut blk = Vec::new();
    for (l, sb) in sub.blocks().enumerate() {
        let offset = (nsub + nbot * l as u64) as Sym;
        for (k, cb) in bot.blocks().enumerate() {
            blk.clear();
            blk.extend(cb.iter().map(|&x| x + offset));
            if let Some(&x) = sb.get(k) {
                blk.push(x);
            }
            out.push_block_unchecked(&blk);
        }
    }
    Ok(out)
}

fn repeated(count: usize) -> BlockedSequence {
    BlockedSequence::from_blocks(std::iter::repeat([0 as Sym]).take(count)).unwrap()
}

fn guard(s: u32, i: u32, j: u64, cap: u64) -> Result<()> {
    let st = predict_stats(s, i, j)?;
    if st.length > BigUint::from(cap) {
        return limit(format!(
            "S{s}({i},{j}) has {} symbols, cap is {cap}",
            describe(&st.length)
        ));
    }
    Ok(())
}

fn to_usize(x: &BigUint) -> usize {
    x.to_usize().expect("value checked against the cap")
}

/// The order-4 sequence `S4(i,j)` in canonical form.
pub fn s4(i: u32, j: u64, cap: u64) -> Result<BlockedSequence> {
    if i < 1 || j < 1 {
        return invalid("s4 needs i >= 1 and j >= 1");
    }
    guard(4, i, j, cap)?;
    Ok(canonicalize_blocked(&s4_raw(i, j)?))
}

fn s4_raw(i: u32, j: u64) -> Result<BlockedSequence> {
    if i == 1 {
        return Ok(s2(j as usize));
    }
    if j == 1 {
        return Ok(repeated(1 << i));
    }
    let y = to_usize(&b4(i, &BigUint::from(j - 1))?);
    let top = canonicalize_blocked(&s4_raw(i - 1, y as u64)?);
    let sub = compose(&top, &s2(y))?;
    let bot = s4_raw(i, j - 1)?;
    shuffle(&sub, &bot)
}

/// The order-5 sequence `S5(i,j)` in canonical form.
pub fn s5(i: u32, j: u64, cap: u64) -> Result<BlockedSequence> {
    if i < 1 || j < 1 {
        return invalid("s5 needs i >= 1 and j >= 1");
    }
    guard(5, i, j, cap)?;
    Ok(canonicalize_blocked(&s5_raw(i, j)?))
}

fn s5_raw(i: u32, j: u64) -> Result<BlockedSequence> {
    if i == 1 {
        return Ok(s2(j as usize));
    }
    if j == 1 {
        return Ok(repeated(mult5(i) as usize));
    }
    let z = b5(i, &BigUint::from(j - 1))?;
    let n4z = to_usize(&n4(i, &z)?);
    let z = to_usize(&z);
    let top = canonicalize_blocked(&s5_raw(i - 1, n4z as u64)?);
    let fl = canonicalize_blocked(&s4_raw(i, z as u64)?);
    let m = reblock(&s2(n4z), z)?;
    let sub = compose3(&top, &fl, &m, &fl)?;
    let bot = s5_raw(i, j - 1)?;
    shuffle(&sub, &bot)
}

fn mult5(i: u32) -> u64 {
    // (2i-3) 2^i + 4, which is 2 at i = 1
    ((2 * i as i64 - 3) * (1i64 << i) + 4) as u64
}

fn overflow() -> Error {
    Error::ResourceLimit(format!("construction size exceeds {MAX_BITS} bits"))
}

fn checked(x: BigUint) -> Result<BigUint> {
    if x.bits() > MAX_BITS {
        Err(overflow())
    } else {
        Ok(x)
    }
}

fn small(j: &BigUint) -> Result<u64> {
    j.to_u64().filter(|&v| v <= MAX_BITS).ok_or_else(overflow)
}

/// Block count `B4(i,j)`.
fn b4(i: u32, j: &BigUint) -> Result<BigUint> {
    match i {
        1 => Ok(BigUint::from(2u32)),
        // B4(2,j) = 4^j
        2 => {
            let j = small(j)?;
            checked(BigUint::one() << (2 * j))
        }
        _ => {
            let j = small(j)?;
            let mut b = BigUint::one() << i;
            for _ in 1..j {
                let y = b;
                b = checked(b4(i - 1, &y)? * 2u32 * &y)?;
            }
            Ok(b)
        }
    }
}

/// Alphabet size `N4(i,j) = j B4(i,j) / 2^i`.
fn n4(i: u32, j: &BigUint) -> Result<BigUint> {
    Ok(checked(j * b4(i, j)?)? >> i)
}

/// `(2 + 2^(1-i)) B4(i,z)`, the number of blocks substituted per top block.
fn blocks_per_top(i: u32, z: &BigUint) -> Result<BigUint> {
    let b = b4(i, z)?;
    let (q, r) = b.div_rem(&(BigUint::one() << (i - 1)));
    if !r.is_zero() {
        return invalid("B4(i,z) not divisible by 2^(i-1)");
    }
    Ok(b * 2u32 + q)
}

/// `(B5(i,j), N5(i,j))`.
fn bn5(i: u32, j: &BigUint) -> Result<(BigUint, BigUint)> {
    if i == 1 {
        return Ok((BigUint::from(2u32), j.clone()));
    }
    let j = small(j)?;
    let mut b = BigUint::from(mult5(i));
    let mut n = BigUint::one();
    for _ in 1..j {
        let z = b;
        let n4z = n4(i, &z)?;
        let (bt, nt) = bn5(i - 1, &n4z)?;
        let per = blocks_per_top(i, &z)?;
        let copies = checked(&bt * per)?;
        b = checked(&copies * &z)?;
        n = checked(nt + copies * n)?;
    }
    Ok((b, n))
}

fn b5(i: u32, j: &BigUint) -> Result<BigUint> {
    Ok(bn5(i, j)?.0)
}

/// `ξ(i) = 3^i 2^C(i+1,2)`.
pub fn xi(i: u32) -> BigUint {
    BigUint::from(3u32).pow(i) << (i as u64 * (i as u64 + 1) / 2)
}

/// Closed-form statistics of a construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructionStats {
    pub s: u32,
    pub i: u32,
    pub j: u64,
    /// Alphabet size.
    pub n: BigUint,
    /// Number of blocks.
    pub b: BigUint,
    /// Occurrences of every symbol.
    pub mult: BigUint,
    pub length: BigUint,
    pub xi: Option<BigUint>,
}

/// Decimal rendering that shortens huge values.
pub fn describe(x: &BigUint) -> String {
    if x.bits() <= 256 {
        x.to_string()
    } else {
        format!("~2^{}", x.bits() - 1)
    }
}

pub(crate) fn json_num(x: &BigUint) -> serde_json::Value {
    match x.to_u64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(describe(x)),
    }
}

impl ConstructionStats {
    pub fn to_json(&self) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        m.insert("N".into(), json_num(&self.n));
        m.insert("B".into(), json_num(&self.b));
        m.insert("mult".into(), json_num(&self.mult));
        m.insert("length".into(), json_num(&self.length));
        if let Some(x) = &self.xi {
            m.insert("xi".into(), json_num(x));
        }
        serde_json::Value::Object(m)
    }

    /// Whether `N5(i,j) >= j B5(i,j) / ξ(i)`.
    pub fn alphabet_lower_bound_holds(&self) -> bool {
        match &self.xi {
            Some(xi) => &self.n * xi >= BigUint::from(self.j) * &self.b,
            None => true,
        }
    }
}

/// Predicted `(N, B, mult, length)` for `S_s(i,j)`, `s ∈ {4,5}`.
pub fn predict_stats(s: u32, i: u32, j: u64) -> Result<ConstructionStats> {
    if i < 1 || j < 1 {
        return invalid("need i >= 1 and j >= 1");
    }
    let jb = BigUint::from(j);
    let (n, b, mult, xi_v) = match s {
        4 => {
            let b = b4(i, &jb)?;
            let n = if i == 1 { jb.clone() } else { n4(i, &jb)? };
            (n, b, BigUint::one() << i, None)
        }
        5 => {
            let (b, n) = bn5(i, &jb)?;
            (n, b, BigUint::from(mult5(i)), Some(xi(i)))
        }
        _ => return invalid(format!("no construction of order {s}")),
    };
    let length = checked(&n * &mult)?;
    Ok(ConstructionStats { s, i, j, n, b, mult, length, xi: xi_v })
}

/// A block pattern `ba[ba]` or `[ba]ab` found in a sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockPatternWitness {
    pub block: usize,
    pub b: Sym,
    pub a: Sym,
    pub pattern: &'static str,
}

/// Scans for `ba[ba]` (a block containing `b` before `a`, preceded by `b`
/// then `a`) and `[ba]ab` (followed by `a` then `b`).
pub fn find_block_pattern(seq: &BlockedSequence) -> Option<BlockPatternWitness> {
    let (dense, back) = crate::sequence::dense_relabel(seq.flat());
    let occ = Occurrences::new(&dense, back.len());
    for k in 0..seq.num_blocks() {
        let lo = seq.block_start(k) as u32;
        let hi = (seq.block_start(k) + seq.block(k).len()) as u32;
        let blk = &dense[lo as usize..hi as usize];
        for (x, &b) in blk.iter().enumerate() {
            for &a in &blk[x + 1..] {
                let (pb, pa) = (occ.of(b), occ.of(a));
                // b then a, both before the block
                let a_before = pa.partition_point(|&p| p < lo);
                if a_before > 0 && pb[0] < pa[a_before - 1] {
                    return Some(BlockPatternWitness { block: k, b: back[b as usize], a: back[a as usize], pattern: "ba[ba]" });
                }
                // a then b, both after the block
                let a_after = pa.partition_point(|&p| p < hi);
                if a_after < pa.len() && pa[a_after] < *pb.last().unwrap() {
                    return Some(BlockPatternWitness { block: k, b: back[b as usize], a: back[a as usize], pattern: "[ba]ab" });
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::ds_order;

    const CAP: u64 = DEFAULT_MAX_SYMBOLS;

    #[test]
    fn s2_shape() {
        let s = s2(3);
        assert_eq!(s.block(0), &[0, 1, 2]);
        assert_eq!(s.block(1), &[2, 1, 0]);
        assert_eq!(ds_order(s.flat()), 2);
    }

    #[test]
    fn compose_multiplies_blocks() {
        let top = s2(2);
        let c = compose(&top, &s2(2)).unwrap();
        assert_eq!(c.num_blocks(), 4);
        assert_eq!(c.flat(), &[0, 1, 1, 0, 1, 0, 0, 1]);
    }

    #[test]
    fn compose_short_block_drops_symbols() {
        let top = BlockedSequence::from_blocks([vec![5u32], vec![5, 6]]).unwrap();
        let c = compose(&top, &s2(2)).unwrap();
        assert_eq!(c.num_blocks(), 4);
        assert_eq!(c.block(0), &[5]);
        assert_eq!(c.block(1), &[5]);
        assert_eq!(c.block(3), &[6, 5]);
    }

    #[test]
    fn shuffle_inserts_at_block_ends() {
        let sub = BlockedSequence::from_blocks([vec![0u32, 1], vec![1, 0]]).unwrap();
        let bot = BlockedSequence::from_blocks([vec![0u32], vec![0]]).unwrap();
        let sh = shuffle(&sub, &bot).unwrap();
        assert_eq!(sh.num_blocks(), 4);
        assert_eq!(sh.block(0), &[2, 0]);
        assert_eq!(sh.block(1), &[2, 1]);
        assert_eq!(sh.block(2), &[3, 1]);
        assert_eq!(sh.block(3), &[3, 0]);
        // order of sub symbols is preserved
        let proj: Vec<Sym> = sh.flat().iter().copied().filter(|&x| x < 2).collect();
        assert_eq!(proj, sub.flat());
    }

    #[test]
    fn compose3_classifies_positions() {
        // symbol 0 appears in three blocks: first, middle, last
        let top = BlockedSequence::from_blocks([vec![0u32], vec![0], vec![0]]).unwrap();
        let f = BlockedSequence::from_blocks([vec![0u32]]).unwrap();
        let m = BlockedSequence::from_blocks([vec![0u32], vec![0]]).unwrap();
        let c = compose3(&top, &f, &m, &f).unwrap();
        // each top block contributes 1 + 2 + 1 blocks, empty ones included
        assert_eq!(c.num_blocks(), 12);
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn frozen_s4_2_2() {
        let s = s4(2, 2, CAP).unwrap();
        assert_eq!(s.alphabet_size(), 8);
        assert_eq!(s.num_blocks(), 16);
        assert_eq!(s.len(), 32);
        assert_eq!(s.uniform_multiplicity(), Some(4));
        assert_eq!(s.uniform_block_length(), Some(2));
    }

    #[test]
    fn base_cases() {
        let s = s5(2, 1, CAP).unwrap();
        assert_eq!(s.flat(), &[0; 8]);
        assert_eq!(s.num_blocks(), 8);
        assert_eq!(s5(1, 4, CAP).unwrap(), s2(4));
        assert_eq!(s4(3, 1, CAP).unwrap().num_blocks(), 8);
    }

    #[test]
    fn stats_match_generation() {
        for (i, j) in [(1, 3), (2, 1), (2, 2), (2, 3), (3, 1)] {
            let s = s4(i, j, CAP).unwrap();
            let st = predict_stats(4, i, j).unwrap();
            assert_eq!(st.n, BigUint::from(s.alphabet_size()));
            assert_eq!(st.b, BigUint::from(s.num_blocks()));
            assert_eq!(st.length, BigUint::from(s.len()));
        }
    }

    #[test]
    fn xi_values() {
        assert_eq!(xi(1), BigUint::from(6u32));
        assert_eq!(xi(2), BigUint::from(72u32));
    }

    #[test]
    fn oversized_requests_are_refused() {
        assert!(matches!(s4(3, 3, CAP), Err(Error::ResourceLimit(_))));
        assert!(matches!(s4(3, 4, CAP), Err(Error::ResourceLimit(_))));
        assert!(matches!(s5(3, 2, CAP), Err(Error::ResourceLimit(_))));
        assert!(matches!(s4(2, 3, 100), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn predicted_sizes() {
        let st = predict_stats(4, 3, 2).unwrap();
        assert_eq!(st.b, BigUint::from(1u32 << 20));
        let st = predict_stats(5, 2, 2).unwrap();
        assert_eq!(st.n, BigUint::from(458_752u32));
        assert_eq!(st.b, BigUint::from(2_621_440u32));
        assert!(st.alphabet_lower_bound_holds());
        assert!(predict_stats(3, 1, 1).is_err());
    }

    #[test]
    fn block_pattern_scan() {
        // [ab] followed by b a: [ba]ab with the roles of a and b swapped
        assert!(find_block_pattern(&s2(2)).is_some());
        let s = s4(2, 2, CAP).unwrap();
        assert_eq!(find_block_pattern(&s), None);
    }
}
