//! Generators and brute-force reference implementations shared by the
//! integration tests and the acceptance report.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use candle_engine::concepts::Concept;
use candle_engine::ingest::{Pos, Token};
use candle_engine::text::is_stopword;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    v
}

pub fn random_unit(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() > 1e-6 {
            return unit(v);
        }
    }
}

/// Unit vectors scattered around a few random centres, so that both close
/// and distant pairs occur.
pub fn clustered_units(rng: &mut impl Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    let centres: Vec<Vec<f64>> = (0..rng.gen_range(1..=4)).map(|_| random_unit(rng, dim)).collect();
    (0..n)
        .map(|_| {
            let c = centres.choose(rng).unwrap();
            let spread = rng.gen_range(0.0..0.8);
            let noise = random_unit(rng, dim);
            unit(c.iter().zip(&noise).map(|(a, b)| a + spread * b).collect())
        })
        .collect()
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Ward clustering by exhaustive search for the closest active pair at
/// every step, with the Lance–Williams update. Ties go to the smallest
/// `(i, j)`; labels are numbered by first appearance.
pub fn naive_ward(points: &[Vec<f64>], threshold: f64) -> Vec<usize> {
    let n = points.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = sq(&points[i], &points[j]);
        }
    }
    let mut size = vec![1.0; n];
    let mut active = vec![true; n];
    let mut owner: Vec<usize> = (0..n).collect();
    loop {
        let mut best: Option<(usize, usize)> = None;
        for i in 0..n {
            for j in i + 1..n {
                if active[i] && active[j] && best.is_none_or(|(a, b)| d[i][j] < d[a][b]) {
                    best = Some((i, j));
                }
            }
        }
        let Some((i, j)) = best else { break };
        let dij = d[i][j];
        if dij.max(0.0).sqrt() > threshold {
            break;
        }
        let (ni, nj) = (size[i], size[j]);
        for k in 0..n {
            if active[k] && k != i && k != j {
                let nk = size[k];
                let v = ((ni + nk) * d[k][i] + (nj + nk) * d[k][j] - nk * dij) / (ni + nj + nk);
                d[k][i] = v;
                d[i][k] = v;
            }
        }
        active[j] = false;
        size[i] = ni + nj;
        owner.iter_mut().filter(|o| **o == j).for_each(|o| *o = i);
    }
    let mut seen: Vec<usize> = Vec::new();
    owner
        .iter()
        .map(|o| match seen.iter().position(|s| s == o) {
            Some(p) => p,
            None => {
                seen.push(*o);
                seen.len() - 1
            }
        })
        .collect()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Inverse cluster frequency computed straight from its definition.
pub fn brute_idf(sizes: &[usize], emb: &[Vec<f64>], theta: f64) -> Vec<f64> {
    let total: f64 = sizes.iter().map(|&s| s as f64).sum();
    (0..sizes.len())
        .map(|c| {
            let mut denom = 0.0;
            for k in 0..sizes.len() {
                if k == c || cosine(&emb[c], &emb[k]) >= theta {
                    denom += sizes[k] as f64;
                }
            }
            total / denom
        })
        .collect()
}

pub fn brute_distinctiveness(sizes: &[usize], emb: &[Vec<f64>], theta: f64) -> Vec<f64> {
    let logs: Vec<f64> = brute_idf(sizes, emb, theta).into_iter().map(f64::ln).collect();
    let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    logs.iter().map(|l| if hi == lo { 1.0 } else { (l - lo) / (hi - lo) }).collect()
}

pub fn tok(surface: &str, lemma: &str, pos: Pos) -> Token {
    Token {
        surface: surface.into(),
        lemma: lemma.into(),
        pos,
        tag: None,
        ner: None,
        is_stop: is_stopword(surface),
        char_span: [0, surface.chars().count()],
    }
}

const VOCAB: &[(&str, &str, Pos)] = &[
    ("festivals", "festival", Pos::Noun),
    ("festival", "festival", Pos::Noun),
    ("beer", "beer", Pos::Noun),
    ("soups", "soup", Pos::Noun),
    ("rice", "rice", Pos::Noun),
    ("kimonos", "kimono", Pos::Noun),
    ("lives", "life", Pos::Noun),
    ("Oktoberfest", "Oktoberfest", Pos::Propn),
    ("drink", "drink", Pos::Verb),
    ("wear", "wear", Pos::Verb),
    ("eat", "eat", Pos::Verb),
    ("save", "save", Pos::Verb),
    ("are", "be", Pos::Aux),
    ("traditional", "traditional", Pos::Adj),
    ("green", "green", Pos::Adj),
    ("spicy", "spicy", Pos::Adj),
    ("the", "the", Pos::Det),
    ("a", "a", Pos::Det),
    ("with", "with", Pos::Adp),
    ("and", "and", Pos::Cconj),
    (",", ",", Pos::Punct),
];

pub struct SyntheticMember {
    pub tokens: Vec<Token>,
    pub masked: Vec<bool>,
}

/// A cluster of 2–8 members built from a shared palette of short token
/// sequences, so that many n-grams recur across members.
pub fn synthetic_cluster(rng: &mut impl Rng) -> Vec<SyntheticMember> {
    let palette: Vec<Vec<usize>> =
        (0..rng.gen_range(2..=4)).map(|_| (0..rng.gen_range(1..=4)).map(|_| rng.gen_range(0..VOCAB.len())).collect()).collect();
    let share: Vec<f64> = palette.iter().map(|_| rng.gen_range(0.3..1.0)).collect();
    (0..rng.gen_range(2..=8))
        .map(|_| {
            let mut tokens = vec![tok("Germans", "German", Pos::Propn)];
            let mut masked = vec![true];
            for (p, s) in palette.iter().zip(&share) {
                if rng.gen_bool(*s) {
                    for &w in p {
                        let (surf, lemma, pos) = VOCAB[w];
                        tokens.push(tok(surf, lemma, pos));
                        masked.push(false);
                    }
                }
                if rng.gen_bool(0.3) {
                    let (surf, lemma, pos) = *VOCAB.choose(rng).unwrap();
                    tokens.push(tok(surf, lemma, pos));
                    masked.push(false);
                }
                if rng.gen_bool(0.15) {
                    tokens.push(tok("Germany", "Germany", Pos::Propn));
                    masked.push(true);
                }
            }
            tokens.push(tok(".", ".", Pos::Punct));
            masked.push(false);
            SyntheticMember { tokens, masked }
        })
        .collect()
}

/// Concepts by enumerating every window of every member and applying the
/// phrase rules directly. Support is compared as the exact fraction
/// `count / m > num / den`.
pub fn oracle_concepts(members: &[SyntheticMember], num: usize, den: usize, max_n: usize) -> Vec<Concept> {
    let m = members.len();
    let mut count: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for mem in members {
        let mut phrases: BTreeSet<(String, usize)> = BTreeSet::new();
        for start in 0..mem.tokens.len() {
            for n in 1..=max_n {
                if start + n > mem.tokens.len() {
                    continue;
                }
                let w = &mem.tokens[start..start + n];
                if mem.masked[start..start + n].contains(&true) || w.iter().any(|t| t.pos == Pos::Punct) {
                    continue;
                }
                let mut words: Vec<String> = w.iter().map(|t| t.surface.to_lowercase()).collect();
                if is_stopword(&words[0]) || is_stopword(words.last().unwrap()) {
                    continue;
                }
                let last = w.last().unwrap();
                let nominal = matches!(last.pos, Pos::Noun | Pos::Propn);
                let verbal = w.iter().any(|t| matches!(t.pos, Pos::Verb | Pos::Aux));
                if nominal && !verbal {
                    *words.last_mut().unwrap() = last.lemma.to_lowercase();
                }
                phrases.insert((words.join(" "), n));
            }
        }
        for (p, n) in phrases {
            count.entry(p).or_insert((0, n)).0 += 1;
        }
    }
    let kept: Vec<(String, usize, usize)> =
        count.into_iter().filter(|(_, (c, _))| c * den > num * m).map(|(p, (c, n))| (p, n, c)).collect();
    let mut out: Vec<Concept> = kept
        .iter()
        .filter(|(p, n, _)| {
            !kept.iter().any(|(q, qn, _)| qn > n && format!(" {q} ").contains(&format!(" {p} ")))
        })
        .map(|(p, n, c)| Concept { phrase: p.clone(), n: *n, support: *c as f64 / m as f64 })
        .collect();
    out.sort_by(|a, b| b.support.partial_cmp(&a.support).unwrap().then_with(|| a.phrase.cmp(&b.phrase)));
    out
}
