//! Sets of vectors in `F_2^T` reachable as sums of at most `j` chosen rows,
//! stored as bitsets over all `2^T` vectors.

const SWAP_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

/// Moves bit `y` of `word` to bit `y ^ low` for `low < 64`.
fn permute_word(mut word: u64, low: u64) -> u64 {
    for (b, mask) in SWAP_MASKS.iter().enumerate() {
        if (low >> b) & 1 == 1 {
            let shift = 1 << b;
            word = ((word & mask) << shift) | ((word >> shift) & mask);
        }
    }
    word
}

/// `dst |= { y ^ x : y in src }`.
fn translate_or(src: &[u64], x: u64, dst: &mut [u64]) {
    let high = (x >> 6) as usize;
    let low = x & 63;
    for (w, &word) in src.iter().enumerate() {
        if word != 0 {
            dst[w ^ high] |= permute_word(word, low);
        }
    }
}

/// Layers `L_0 ⊆ L_1 ⊆ ... ⊆ L_k` for a growing set of rows, with
/// `L_j` the sums of at most `j` of them.
#[derive(Clone, Debug)]
pub(crate) struct Layers {
    words: usize,
    k: usize,
    data: Vec<u64>,
}

impl Layers {
    pub(crate) fn new(t: usize, k: usize) -> Self {
        let words = ((1usize << t) / 64).max(1);
        let mut data = vec![0u64; (k + 1) * words];
        for j in 0..=k {
            data[j * words] = 1;
        }
        Self { words, k, data }
    }

    pub(crate) fn add(&mut self, x: u64) {
        for j in (1..=self.k).rev() {
            let (lower, upper) = self.data.split_at_mut(j * self.words);
            translate_or(&lower[(j - 1) * self.words..], x, &mut upper[..self.words]);
        }
    }

    pub(crate) fn contains(&self, j: usize, v: u64) -> bool {
        let bit = v as usize;
        (self.data[j * self.words + bit / 64] >> (bit % 64)) & 1 == 1
    }

    /// Size of `L_k`.
    #[cfg(test)]
    pub(crate) fn reach(&self) -> u32 {
        self.data[self.k * self.words..].iter().map(|w| w.count_ones()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permute_matches_pointwise_xor() {
        let word = 0x8000_0000_0000_0013u64;
        for low in 0..64u64 {
            let moved = permute_word(word, low);
            for y in 0..64u64 {
                assert_eq!((moved >> (y ^ low)) & 1, (word >> y) & 1);
            }
        }
    }

    #[test]
    fn layers_count_small_sums() {
        // Unit vectors of F_2^8: L_2 holds 1 + 8 + 28 vectors.
        let mut l = Layers::new(8, 2);
        for i in 0..8 {
            l.add(1 << i);
        }
        assert_eq!(l.reach(), 37);
        assert!(l.contains(2, 0b1000_0001));
        assert!(!l.contains(2, 0b1000_0011));
        assert!(l.contains(1, 0b0100_0000));
    }
}
