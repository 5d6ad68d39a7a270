//! Lexicographic permutation ranking via Lehmer codes.
//!
//! `unrank(n, r)` returns the `r`-th permutation of `0..n` in lexicographic
//! order; `rank` inverts it. Windows are capped at [`MAX_WINDOW`] so every
//! factorial fits in a `u64`.

/// Largest window: 20! still fits in 64 bits.
pub const MAX_WINDOW: usize = 20;

/// n! for n <= MAX_WINDOW.
pub fn factorial(n: usize) -> u64 {
    assert!(n <= MAX_WINDOW, "window {n} exceeds MAX_WINDOW");
    (1..=n as u64).product()
}

/// floor(log2(n!)): the number of whole bits a window of n elements carries.
pub fn rank_bits(n: usize) -> u32 {
    let f = factorial(n);
    63 - f.leading_zeros()
}

/// The `rank`-th permutation of `0..n` in lexicographic order.
///
/// Panics if `rank >= n!`; callers derive ranks from bit groups narrower
/// than `rank_bits(n)`, which keeps them in range by construction.
pub fn unrank(n: usize, rank: u64) -> Vec<usize> {
    assert!(rank < factorial(n), "rank {rank} out of range for n={n}");
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    let mut r = rank;
    for pos in 0..n {
        let f = factorial(n - 1 - pos);
        let idx = (r / f) as usize;
        r %= f;
        out.push(remaining.remove(idx));
    }
    out
}

/// Lexicographic rank of a permutation of `0..n`.
pub fn rank(perm: &[usize]) -> u64 {
    let n = perm.len();
    debug_assert!(n <= MAX_WINDOW);
    let mut r = 0u64;
    for (pos, &p) in perm.iter().enumerate() {
        // Lehmer digit: how many unused values are smaller than p.
        let smaller = perm[pos + 1..].iter().filter(|&&q| q < p).count() as u64;
        r += smaller * factorial(n - 1 - pos);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: enumerate permutations of 0..n in lexicographic
    /// order with the classic next-permutation step.
    fn lex_permutations(n: usize) -> Vec<Vec<usize>> {
        let mut cur: Vec<usize> = (0..n).collect();
        let mut all = vec![cur.clone()];
        loop {
            let Some(i) = (0..cur.len().saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1])
            else {
                break;
            };
            let j = (i + 1..cur.len()).rev().find(|&j| cur[j] > cur[i]).unwrap();
            cur.swap(i, j);
            cur[i + 1..].reverse();
            all.push(cur.clone());
        }
        all
    }

    #[test]
    fn unrank_matches_lexicographic_enumeration_up_to_six() {
        for n in 1..=6 {
            let all = lex_permutations(n);
            assert_eq!(all.len() as u64, factorial(n));
            for (r, perm) in all.iter().enumerate() {
                assert_eq!(&unrank(n, r as u64), perm, "n={n} rank={r}");
                assert_eq!(rank(perm), r as u64, "n={n} perm={perm:?}");
            }
        }
    }

    #[test]
    fn rank_zero_is_identity() {
        assert_eq!(unrank(3, 0), vec![0, 1, 2]);
    }

    #[test]
    fn documented_example_rank_four_of_three() {
        // 4th (0-based) permutation of three elements is [2,0,1].
        assert_eq!(unrank(3, 4), vec![2, 0, 1]);
    }

    #[test]
    fn rank_bits_counts_whole_bits() {
        // Brute-force check: 2^rank_bits(n) <= n! < 2^(rank_bits(n)+1).
        for n in 1..=10 {
            let k = rank_bits(n);
            assert!(1u64 << k <= factorial(n));
            assert!((1u128 << (k + 1)) > factorial(n) as u128);
        }
        assert_eq!(rank_bits(4), 4); // log2(24) floored
        assert_eq!(rank_bits(1), 0);
    }

    #[test]
    fn factorial_at_cap() {
        assert_eq!(factorial(20), 2_432_902_008_176_640_000);
    }
}
