//! SHA-256, HMAC-SHA-256 and PBKDF2-HMAC-SHA-256.
//!
//! Passwords are raw bytes. No Unicode normalization is applied.

use thiserror::Error;
use zeroize::Zeroize;

pub type Digest = [u8; 32];

pub const DEFAULT_ITERATIONS: u32 = 100_000;
pub const SALT_LEN: usize = 64;

const BLOCK: usize = 64;

const K: [u32; 64] = [
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
];

const H0: [u32; 8] = [
    0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19,
];

fn compress(state: &mut [u32; 8], block: &[u8; BLOCK]) {
    let mut w = [0u32; 64];
    for (i, chunk) in block.chunks_exact(4).enumerate() {
        w[i] = u32::from_be_bytes(chunk.try_into().unwrap());
    }
    for i in 16..64 {
        let s0 = w[i - 15].rotate_right(7) ^ w[i - 15].rotate_right(18) ^ (w[i - 15] >> 3);
        let s1 = w[i - 2].rotate_right(17) ^ w[i - 2].rotate_right(19) ^ (w[i - 2] >> 10);
        w[i] = w[i - 16]
            .wrapping_add(s0)
            .wrapping_add(w[i - 7])
            .wrapping_add(s1);
    }

    let [mut a, mut b, mut c, mut d, mut e, mut f, mut g, mut h] = *state;
    for i in 0..64 {
        let s1 = e.rotate_right(6) ^ e.rotate_right(11) ^ e.rotate_right(25);
        let ch = (e & f) ^ (!e & g);
        let t1 = h
            .wrapping_add(s1)
            .wrapping_add(ch)
            .wrapping_add(K[i])
            .wrapping_add(w[i]);
        let s0 = a.rotate_right(2) ^ a.rotate_right(13) ^ a.rotate_right(22);
        let maj = (a & b) ^ (a & c) ^ (b & c);
        let t2 = s0.wrapping_add(maj);
        h = g;
        g = f;
        f = e;
        e = d.wrapping_add(t1);
        d = c;
        c = b;
        b = a;
        a = t1.wrapping_add(t2);
    }
    for (s, v) in state.iter_mut().zip([a, b, c, d, e, f, g, h]) {
        *s = s.wrapping_add(v);
    }
}

/// Incremental SHA-256.
#[derive(Clone)]
pub struct Sha256 {
    state: [u32; 8],
    buf: [u8; BLOCK],
    buf_len: usize,
    total_len: u64,
}

impl Default for Sha256 {
    fn default() -> Self {
        Self::new()
    }
}

impl Sha256 {
    pub fn new() -> Self {
        Sha256 {
            state: H0,
            buf: [0; BLOCK],
            buf_len: 0,
            total_len: 0,
        }
    }

    pub fn update(&mut self, mut data: &[u8]) {
        self.total_len = self.total_len.wrapping_add(data.len() as u64);
        if self.buf_len > 0 {
            let take = (BLOCK - self.buf_len).min(data.len());
            self.buf[self.buf_len..self.buf_len + take].copy_from_slice(&data[..take]);
            self.buf_len += take;
            data = &data[take..];
            if self.buf_len < BLOCK {
                return;
            }
            let block = self.buf;
            compress(&mut self.state, &block);
            self.buf_len = 0;
        }
        let mut chunks = data.chunks_exact(BLOCK);
        for block in &mut chunks {
            compress(&mut self.state, block.try_into().unwrap());
        }
        let rest = chunks.remainder();
        self.buf[..rest.len()].copy_from_slice(rest);
        self.buf_len = rest.len();
    }

    pub fn finalize(mut self) -> Digest {
        let bit_len = self.total_len.wrapping_mul(8);
        let mut pad = [0u8; 2 * BLOCK];
        pad[0] = 0x80;
        let pad_len = if self.buf_len < 56 { 56 - self.buf_len } else { 120 - self.buf_len };
        self.update(&pad[..pad_len]);
        self.update(&bit_len.to_be_bytes());
        debug_assert_eq!(self.buf_len, 0);
        let mut out = [0u8; 32];
        for (dst, w) in out.chunks_exact_mut(4).zip(self.state) {
            dst.copy_from_slice(&w.to_be_bytes());
        }
        self.buf.zeroize();
        out
    }
}

pub fn sha256(message: &[u8]) -> Digest {
    let mut h = Sha256::new();
    h.update(message);
    h.finalize()
}

/// HMAC-SHA-256 keyed once, reusable across messages.
#[derive(Clone)]
pub struct HmacSha256 {
    inner: Sha256,
    outer: Sha256,
}

impl HmacSha256 {
    pub fn new(key: &[u8]) -> Self {
        let mut block = [0u8; BLOCK];
        if key.len() > BLOCK {
            block[..32].copy_from_slice(&sha256(key));
        } else {
            block[..key.len()].copy_from_slice(key);
        }
        let mut ipad = block.map(|b| b ^ 0x36);
        let mut opad = block.map(|b| b ^ 0x5c);
        let mut inner = Sha256::new();
        inner.update(&ipad);
        let mut outer = Sha256::new();
        outer.update(&opad);
        block.zeroize();
        ipad.zeroize();
        opad.zeroize();
        HmacSha256 { inner, outer }
    }

    pub fn mac(&self, message: &[u8]) -> Digest {
        self.mac_parts(&[message])
    }

    fn mac_parts(&self, parts: &[&[u8]]) -> Digest {
        let mut inner = self.inner.clone();
        for p in parts {
            inner.update(p);
        }
        let inner_digest = inner.finalize();
        let mut outer = self.outer.clone();
        outer.update(&inner_digest);
        outer.finalize()
    }
}

pub fn hmac_sha256(key: &[u8], message: &[u8]) -> Digest {
    HmacSha256::new(key).mac(message)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum KdfParamsError {
    #[error("iteration count must be at least 1")]
    ZeroIterations,
    #[error("output length must be at least 1")]
    ZeroLength,
}

/// Salt, iteration count and output length for PBKDF2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KdfParams {
    salt: Vec<u8>,
    iterations: u32,
    output_length: usize,
}

impl KdfParams {
    pub fn new(
        salt: impl Into<Vec<u8>>,
        iterations: u32,
        output_length: usize,
    ) -> Result<Self, KdfParamsError> {
        if iterations == 0 {
            return Err(KdfParamsError::ZeroIterations);
        }
        if output_length == 0 {
            return Err(KdfParamsError::ZeroLength);
        }
        Ok(KdfParams {
            salt: salt.into(),
            iterations,
            output_length,
        })
    }

    pub fn salt(&self) -> &[u8] {
        &self.salt
    }

    pub fn iterations(&self) -> u32 {
        self.iterations
    }

    pub fn output_length(&self) -> usize {
        self.output_length
    }
}

pub fn pbkdf2_hmac_sha256(password: &[u8], params: &KdfParams) -> Vec<u8> {
    let prf = HmacSha256::new(password);
    let mut out = Vec::with_capacity(params.output_length);
    let mut block_index: u32 = 1;
    while out.len() < params.output_length {
        let mut u = prf.mac_parts(&[&params.salt, &block_index.to_be_bytes()]);
        let mut t = u;
        for _ in 1..params.iterations {
            u = prf.mac(&u);
            for (acc, x) in t.iter_mut().zip(&u) {
                *acc ^= x;
            }
        }
        let take = (params.output_length - out.len()).min(t.len());
        out.extend_from_slice(&t[..take]);
        u.zeroize();
        t.zeroize();
        block_index += 1;
    }
    out
}
