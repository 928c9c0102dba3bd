//! Seeded randomness. Every stream is a ChaCha8 generator keyed by the run
//! seed; the stream number separates coins from scheduler randomness.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const COIN_STREAM: u64 = 0;
pub const SCHEDULER_STREAM: u64 = 1;
pub const GUESS_STREAM: u64 = 2;
pub const WORKLOAD_STREAM: u64 = 3;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Fair bits, outcome `i` a fixed function of `(seed, i)`.
#[derive(Clone, Debug)]
pub struct CoinStream {
    seed: u64,
    cursor: u64,
    rng: ChaCha8Rng,
}

impl CoinStream {
    pub fn new(seed: u64) -> Self {
        CoinStream {
            seed,
            cursor: 0,
            rng: stream_rng(seed, COIN_STREAM),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    pub fn flip(&mut self) -> u8 {
        self.cursor += 1;
        (self.rng.next_u32() & 1) as u8
    }
}

/// Smallest seed at or above `from` whose first coin equals `bit`.
pub fn seed_with_first_coin(bit: u8, from: u64) -> u64 {
    (from..).find(|s| CoinStream::new(*s).flip() == bit).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_bits() {
        let mut a = CoinStream::new(11);
        let mut b = CoinStream::new(11);
        let xs: Vec<u8> = (0..64).map(|_| a.flip()).collect();
        let ys: Vec<u8> = (0..64).map(|_| b.flip()).collect();
        assert_eq!(xs, ys);
        assert_eq!(a.cursor(), 64);
    }

    #[test]
    fn streams_are_independent_of_each_other() {
        let mut coins = stream_rng(5, COIN_STREAM);
        let mut sched = stream_rng(5, SCHEDULER_STREAM);
        let a: Vec<u32> = (0..8).map(|_| coins.next_u32()).collect();
        let b: Vec<u32> = (0..8).map(|_| sched.next_u32()).collect();
        assert_ne!(a, b);
    }

    #[test]
    fn bits_look_fair() {
        // 20000 flips: a fair coin stays within 4 sigma (~283) of 10000.
        let mut ones = 0u32;
        for seed in 0..100 {
            let mut c = CoinStream::new(seed);
            for _ in 0..200 {
                ones += u32::from(c.flip());
            }
        }
        assert!((ones as i64 - 10_000).abs() < 283, "ones = {ones}");
    }

    #[test]
    fn first_coin_seed_search() {
        for bit in [0, 1] {
            let s = seed_with_first_coin(bit, 0);
            assert_eq!(CoinStream::new(s).flip(), bit);
        }
    }
}
