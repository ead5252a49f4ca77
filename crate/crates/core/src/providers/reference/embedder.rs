//! Feature-hashing sentence embedder.
//!
//! The lowercased text is split into alphanumeric words. Each word
//! contributes a unigram feature (`w:<word>`, weight 1.0) and the char
//! trigrams of `^word$` (`c:<tri>`, weight 0.5 each). A feature hashes with
//! 64-bit FNV-1a to bucket `h % 128` with sign `+1` if the top bit of `h`
//! is clear, `-1` otherwise. The accumulated vector is L2-normalized. Text
//! without words uses the single feature `w:<empty>`.

use crate::providers::{Embedder, ProviderError};

pub const REFERENCE_DIM: usize = 128;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

fn add_feature(v: &mut [f64], feature: &str, weight: f64) {
    let h = fnv1a(feature.as_bytes());
    let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
    v[(h % v.len() as u64) as usize] += sign * weight;
}

pub fn reference_embedding(text: &str) -> Vec<f64> {
    let mut v = vec![0.0; REFERENCE_DIM];
    let lower = text.to_lowercase();
    let mut any = false;
    for word in lower.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()) {
        any = true;
        add_feature(&mut v, &format!("w:{word}"), 1.0);
        let padded: Vec<char> = format!("^{word}$").chars().collect();
        for tri in padded.windows(3) {
            add_feature(&mut v, &format!("c:{}", tri.iter().collect::<String>()), 0.5);
        }
    }
    if !any {
        add_feature(&mut v, "w:<empty>", 1.0);
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    } else {
        // Every feature cancelled out; fall back to a fixed basis vector.
        v[0] = 1.0;
    }
    v
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ReferenceEmbedder;

impl Embedder for ReferenceEmbedder {
    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError> {
        Ok(texts.iter().map(|t| reference_embedding(t)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn fnv_reference_values() {
        // Published FNV-1a 64 test vectors.
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn unit_norm_and_deterministic() {
        for t in ["", "Beer is a drink.", "aaa", "Fried rice is a popular Chinese dish", "!!!"] {
            let v = reference_embedding(t);
            assert_eq!(v.len(), REFERENCE_DIM);
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() <= 1e-6, "{t}: {n}");
            assert_eq!(v, reference_embedding(t));
        }
    }

    #[test]
    fn distinct_texts_are_not_identical() {
        let c = cos(&reference_embedding("aaa"), &reference_embedding("zzz"));
        assert!(c < 0.99, "{c}");
    }

    #[test]
    fn paraphrases_are_closer_than_unrelated_text() {
        let a = reference_embedding("Fried rice is a popular Chinese dish.");
        let b = reference_embedding("Fried rice is a famous dish from China.");
        let c = reference_embedding("Firefighters climb ladders during emergencies.");
        assert!(cos(&a, &b) > cos(&a, &c));
    }
}
