//! Canonical signature keys.
//!
//! A signature is encoded as a word sequence. Short encodings are kept
//! verbatim; once an encoding passes [`EXACT_LIMIT`] words the sink switches
//! to a running SHA-256 so memory stays bounded no matter how large an
//! antichain gets.

use sha2::{Digest, Sha256};

pub const EXACT_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SigKey {
    Exact(Vec<u64>),
    Digest([u8; 32]),
}

/// Destination for encoded signature words.
pub trait WordSink {
    fn word(&mut self, w: u64);

    fn words(&mut self, ws: &[u64]) {
        for &w in ws {
            self.word(w);
        }
    }
}

impl WordSink for Vec<u64> {
    fn word(&mut self, w: u64) {
        self.push(w);
    }
}

#[derive(Default)]
pub struct KeySink {
    buf: Vec<u64>,
    hasher: Option<Sha256>,
    len: u64,
}

impl KeySink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn finish(self) -> SigKey {
        match self.hasher {
            None => SigKey::Exact(self.buf),
            Some(mut h) => {
                h.update(self.len.to_le_bytes());
                SigKey::Digest(h.finalize().into())
            }
        }
    }
}

impl WordSink for KeySink {
    fn word(&mut self, w: u64) {
        self.len += 1;
        if let Some(h) = self.hasher.as_mut() {
            h.update(w.to_le_bytes());
            return;
        }
        self.buf.push(w);
        if self.buf.len() > EXACT_LIMIT {
            let mut h = Sha256::new();
            for x in self.buf.drain(..) {
                h.update(x.to_le_bytes());
            }
            self.buf.shrink_to_fit();
            self.hasher = Some(h);
        }
    }
}
