mod common;

use candle_engine::concepts::{extract_concepts, Concept, ConceptMember, ConceptParams};
use candle_engine::ingest::Pos;
use common::{tok, SyntheticMember};

fn run(members: &[SyntheticMember]) -> Vec<Concept> {
    let ms: Vec<ConceptMember> = members.iter().map(|m| ConceptMember { tokens: &m.tokens, masked: m.masked.clone() }).collect();
    extract_concepts(&ms, &ConceptParams::default())
}

fn member(words: &[(&str, &str, Pos)]) -> SyntheticMember {
    let tokens: Vec<_> = words.iter().map(|(s, l, p)| tok(s, l, *p)).collect();
    SyntheticMember { masked: vec![false; tokens.len()], tokens }
}

#[test]
fn matches_enumeration_on_random_clusters() {
    let mut rng = common::rng(99);
    let mut nonempty = 0;
    for _ in 0..100 {
        let c = common::synthetic_cluster(&mut rng);
        let want = common::oracle_concepts(&c, 3, 5, 3);
        assert_eq!(run(&c), want);
        nonempty += usize::from(!want.is_empty());
    }
    assert!(nonempty > 50);
}

#[test]
fn support_boundary_is_strict() {
    let hit = [("miso", "miso", Pos::Noun), ("soup", "soup", Pos::Noun)];
    let miss = [("tea", "tea", Pos::Noun)];
    let three: Vec<_> = (0..5).map(|i| member(if i < 3 { &hit } else { &miss })).collect();
    assert!(run(&three).iter().all(|c| c.phrase != "miso soup"));
    assert_eq!(common::oracle_concepts(&three, 3, 5, 3), run(&three));
    let four: Vec<_> = (0..5).map(|i| member(if i < 4 { &hit } else { &miss })).collect();
    let got = run(&four);
    assert_eq!(got[0], Concept { phrase: "miso soup".into(), n: 2, support: 0.8 });
    assert!(got.iter().all(|c| c.phrase != "miso" && c.phrase != "soup"), "sub-phrases are suppressed: {got:?}");
    assert_eq!(common::oracle_concepts(&four, 3, 5, 3), got);
}
