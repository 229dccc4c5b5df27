#![allow(dead_code)]

use std::collections::BTreeMap;

use csm::corpus::{AnnotatedSentence, Corpus, Role, Tag, TagSchema};
use csm::hin::{Hin, Node, NodeId};
use csm::ncsl::{CrossSupervision, MatrixMode};
use csm::tagger::{backward, batch_loss, Dims, Example, Mode, Objective, TaggerParams};
use csm::hin::{build_hin, MetaPathMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn toy_schema() -> TagSchema {
    TagSchema::new(["PER", "GPE", "WEA"], ["Movement", "Conflict"]).unwrap()
}

/// Random BIO-valid sentences over a `vocab`-word vocabulary.
pub fn random_examples(schema: &TagSchema, vocab: usize, n: usize, seed: u64) -> Vec<Example> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = rng.random_range(3..7);
            let mut tags = Vec::with_capacity(len);
            for i in 0..len {
                let prev = if i == 0 { 0 } else { tags[i - 1] };
                let tag = match rng.random_range(0..4) {
                    0 => 0,
                    1 if prev != 0 => {
                        let t = schema.tag(prev);
                        match t {
                            Tag::Begin(r, k) | Tag::Inside(r, k) => schema.tag_index(Tag::Inside(r, k)),
                            Tag::Outside => 0,
                        }
                    }
                    2 => schema.tag_index(Tag::Begin(Role::Trigger, rng.random_range(0..schema.trigger_types().len()))),
                    _ => schema.tag_index(Tag::Begin(Role::Entity, rng.random_range(0..schema.entity_types().len()))),
                };
                tags.push(tag);
            }
            Example {
                tokens: (0..len).map(|_| rng.random_range(0..vocab)).collect(),
                tags,
            }
        })
        .collect()
}

/// A corpus whose tokens are `w<index>`, so its network is easy to build.
pub fn examples_corpus(schema: &TagSchema, examples: &[Example]) -> Corpus {
    let sentences = examples
        .iter()
        .map(|e| {
            AnnotatedSentence::new(schema, e.tokens.iter().map(|t| format!("w{t}")).collect(), e.tags.clone())
                .unwrap()
        })
        .collect();
    Corpus::new(schema.clone(), sentences)
}

pub fn toy_matrix(schema: &TagSchema) -> MetaPathMatrix {
    let corpus = examples_corpus(schema, &random_examples(schema, 20, 40, 77));
    MetaPathMatrix::build(&build_hin(&corpus), schema, 3).unwrap()
}

pub struct GradCheck {
    pub max_rel_error: f64,
    pub worst: String,
    pub checked: usize,
}

/// Central finite differences with `step` on `per_array` random coordinates
/// of every parameter array. Relative error is `|a − n| / max(|a|, |n|, floor)`.
#[allow(clippy::too_many_arguments)]
pub fn finite_difference_check(
    params: &TaggerParams,
    batch: &[&Example],
    objective: &Objective<'_>,
    mode: Mode,
    per_array: usize,
    step: f64,
    floor: f64,
    seed: u64,
) -> GradCheck {
    let dropout_seed = seed ^ 0xd0;
    let (_, grads) = backward(params, batch, objective, mode, &mut ChaCha8Rng::seed_from_u64(dropout_seed)).unwrap();
    let loss_at = |p: &TaggerParams| {
        batch_loss(p, batch, objective, mode, &mut ChaCha8Rng::seed_from_u64(dropout_seed))
            .unwrap()
            .combined
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut result = GradCheck { max_rel_error: 0.0, worst: String::new(), checked: 0 };
    let n_arrays = params.arrays().len();
    for a in 0..n_arrays {
        let len = params.arrays()[a].len();
        // embedding rows of tokens outside the batch have zero gradient; sample used rows
        let candidates: Vec<usize> = if a == 0 {
            let d = params.dims.d_emb;
            let mut used: Vec<usize> = batch.iter().flat_map(|e| e.tokens.iter().copied()).collect();
            used.sort_unstable();
            used.dedup();
            used.iter().flat_map(|&t| (t * d)..(t * d + d)).collect()
        } else {
            (0..len).collect()
        };
        for _ in 0..per_array {
            let idx = candidates[rng.random_range(0..candidates.len())];
            let mut plus = params.clone();
            plus.arrays_mut()[a].data[idx] += step;
            let mut minus = params.clone();
            minus.arrays_mut()[a].data[idx] -= step;
            let numeric = (loss_at(&plus) - loss_at(&minus)) / (2.0 * step);
            let analytic = grads.arrays()[a].data[idx];
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor);
            result.checked += 1;
            if rel > result.max_rel_error {
                result.max_rel_error = rel;
                result.worst = format!(
                    "{}[{idx}]: analytic {analytic:e}, numeric {numeric:e}",
                    params.arrays()[a].name
                );
            }
        }
    }
    result
}

pub fn toy_params(schema: &TagSchema, seed: u64) -> TaggerParams {
    let dims = Dims { vocab: 20, d_emb: 8, d_hid: 8, n_layers: 1, n_tags: schema.num_tags() };
    TaggerParams::init(dims, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn cross(schema: &TagSchema, mode: MatrixMode) -> CrossSupervision {
    CrossSupervision::new(&toy_matrix(schema), mode)
}

/// Random bipartite graph over the toy schema.
pub fn random_bipartite(schema: &TagSchema, n_nodes: usize, n_edges: usize, seed: u64) -> Hin {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_ent = (n_nodes / 2).max(1);
    let mut nodes = Vec::new();
    for i in 0..n_nodes {
        let role = if i < n_ent { Role::Entity } else { Role::Trigger };
        let types = schema.types(role);
        nodes.push(Node {
            role,
            node_type: types[rng.random_range(0..types.len())].clone(),
            key: format!("n{i}"),
        });
    }
    let n_trg = n_nodes - n_ent;
    let mut edges = Vec::new();
    if n_trg > 0 {
        for _ in 0..n_edges {
            let e = rng.random_range(0..n_ent);
            let t = n_ent + rng.random_range(0..n_trg);
            edges.push((e, t, rng.random_range(1..4)));
        }
    }
    Hin::from_parts(nodes, &edges).unwrap()
}

/// Exhaustive oracle for the meta-path matrix: enumerate every node walk of
/// `length` edges from every entity node, take the product of
/// `w · 1/|typed neighbours|` along it, group by the realized type sequence,
/// sum within each group, then sum logs per (start type, end type).
pub fn brute_force_meta(hin: &Hin, schema: &TagSchema, length: usize) -> Vec<Vec<Option<f64>>> {
    fn walks(hin: &Hin, path: &mut Vec<NodeId>, remaining: usize, out: &mut Vec<Vec<NodeId>>) {
        if remaining == 0 {
            out.push(path.clone());
            return;
        }
        let last = *path.last().unwrap();
        for &(next, _) in hin.neighbors(last) {
            path.push(next);
            walks(hin, path, remaining - 1, out);
            path.pop();
        }
    }
    let mut by_types: BTreeMap<Vec<String>, f64> = BTreeMap::new();
    for (start, node) in hin.nodes().iter().enumerate() {
        if node.role != Role::Entity {
            continue;
        }
        let mut all = Vec::new();
        walks(hin, &mut vec![start], length, &mut all);
        for walk in all {
            let types: Vec<String> = walk.iter().map(|&n| hin.type_of(n).unwrap().to_string()).collect();
            let mut score = 1.0;
            for pair in walk.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                let next_type = hin.type_of(b).unwrap();
                let typed = hin
                    .neighbors(a)
                    .iter()
                    .filter(|(m, _)| hin.type_of(*m).unwrap() == next_type)
                    .count();
                score *= hin.weight(a, b) as f64 / typed as f64;
            }
            *by_types.entry(types).or_insert(0.0) += score;
        }
    }
    let mut meta = vec![vec![None; schema.trigger_types().len()]; schema.entity_types().len()];
    for (types, score) in by_types {
        let u = schema.type_index(Role::Entity, &types[0]).unwrap();
        let v = schema.type_index(Role::Trigger, types.last().unwrap()).unwrap();
        if score > 0.0 {
            let cell: &mut Option<f64> = &mut meta[u][v];
            *cell = Some(cell.unwrap_or(0.0) + score.ln());
        }
    }
    meta
}

pub fn max_meta_deviation(a: &[Vec<Option<f64>>], b: &[Vec<Option<f64>>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            match (x, y) {
                (Some(x), Some(y)) => worst = worst.max((x - y).abs()),
                (None, None) => {}
                _ => return f64::INFINITY,
            }
        }
    }
    worst
}

pub fn metric_schema() -> TagSchema {
    TagSchema::new(["PER", "GPE"], ["Movement", "Conflict"]).unwrap()
}

/// Ten (predicted, gold) tag sequences. Hand counts:
/// entity tp 6 fp 3 fn 2, trigger tp 3 fp 2 fn 2, joint tp 9 fp 5 fn 4.
/// The last pair alone is trigger tp 1, fp 1, fn 0.
pub fn metric_fixture(schema: &TagSchema) -> Vec<(Vec<usize>, Vec<usize>)> {
    let t = |names: &[&str]| -> Vec<usize> {
        names
            .iter()
            .map(|n| match *n {
                "O" => 0,
                "BP" => schema.parse_tag("B-ENT:PER").unwrap(),
                "IP" => schema.parse_tag("I-ENT:PER").unwrap(),
                "BG" => schema.parse_tag("B-ENT:GPE").unwrap(),
                "IG" => schema.parse_tag("I-ENT:GPE").unwrap(),
                "BM" => schema.parse_tag("B-TRG:Movement").unwrap(),
                "BC" => schema.parse_tag("B-TRG:Conflict").unwrap(),
                other => panic!("{other}"),
            })
            .collect()
    };
    vec![
        (t(&["BP", "IP", "O", "BM"]), t(&["BP", "IP", "O", "BM"])),
        (t(&["O", "O"]), t(&["O", "BG"])),
        (t(&["BP", "O"]), t(&["O", "O"])),
        (t(&["BM", "O"]), t(&["BC", "O"])),
        (t(&["BG", "O", "BC"]), t(&["BG", "O", "BC"])),
        (t(&["BP", "BP"]), t(&["BP", "IP"])),
        (t(&["BG"]), t(&["BM"])),
        (t(&["O", "O", "O"]), t(&["O", "O", "O"])),
        (t(&["BG", "IG"]), t(&["BG", "IG"])),
        (t(&["BM", "BM"]), t(&["O", "BM"])),
    ]
}

pub fn five_by_three() -> TagSchema {
    TagSchema::new(["PER", "GPE", "ORG", "WEA", "VEH"], ["Movement", "Conflict", "Transaction"]).unwrap()
}
