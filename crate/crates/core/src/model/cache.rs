use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use crate::alphabet::{Alphabet, Word};
use crate::distribution::Distribution;
use crate::error::Result;

use super::LanguageModel;

/// Memoizing wrapper that also counts query complexity.
pub struct CachedModel<M> {
    inner: M,
    entries: Mutex<HashMap<Word, Distribution>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl<M: LanguageModel> CachedModel<M> {
    pub fn new(inner: M) -> Self {
        CachedModel {
            inner,
            entries: Mutex::new(HashMap::new()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    /// Number of queries forwarded to the wrapped model.
    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }
}

/// Wraps `m` in a [`CachedModel`].
pub fn cached<M: LanguageModel>(m: M) -> CachedModel<M> {
    CachedModel::new(m)
}

impl<M: LanguageModel> LanguageModel for CachedModel<M> {
    fn alphabet(&self) -> &Arc<Alphabet> {
        self.inner.alphabet()
    }

    fn query(&self, word: &[usize]) -> Result<Distribution> {
        if let Some(d) = self.entries.lock().expect("cache poisoned").get(word) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(d.clone());
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let d = self.inner.query(word)?;
        self.entries
            .lock()
            .expect("cache poisoned")
            .entry(word.to_vec())
            .or_insert_with(|| d.clone());
        Ok(d)
    }
}
