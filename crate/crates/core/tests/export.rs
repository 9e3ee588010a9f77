mod common;

use htmot_core::export::{
    apply_labels, document_tree, load_labels, save_labels, time_bin, Labels,
};
use htmot_core::idt::{Forest, NodePath};
use htmot_core::{export_model, Corpus, ExportOptions, HyperParams, TopicTreeExport};

fn trained() -> (Corpus, Forest) {
    let corpus = common::random_corpus(21, 60, 50, 30);
    let params = HyperParams {
        alpha: 1.0,
        beta: 1.0,
        iterations: 30,
        batch_size: 20,
        sgi: 20,
        ..common::small_params()
    };
    let model = htmot_core::train(&corpus, params, 4).unwrap();
    (corpus, model.forest)
}

/// Tokens of document `d` assigned at or below `path`.
fn doc_count(forest: &Forest, d: usize, path: &NodePath) -> u64 {
    forest.assignments()[d]
        .iter()
        .flatten()
        .filter(|a| a.starts_with(path))
        .count() as u64
}

#[test]
fn export_matches_forest() {
    let (corpus, forest) = trained();
    let export = export_model(&forest, &corpus, &ExportOptions::default());
    let nodes = export.nodes();
    assert!(!nodes.is_empty());
    let mut valid = 0;
    forest.walk(|p, n| {
        let reachable = p.ancestors().all(|a| a.is_root() || forest.rules().is_valid(forest.node(&a).unwrap().total()));
        if forest.rules().is_valid(n.total()) && reachable {
            valid += 1;
        }
    });
    assert_eq!(nodes.len(), valid);
    for node in &nodes {
        let topic = forest.node(&node.path).unwrap();
        assert_eq!(node.size, topic.total());
        assert_eq!(node.id, node.path.id());
        assert_eq!(node.empirical_time.len(), 50);
        assert_eq!(node.empirical_time.iter().sum::<u64>(), node.size);
        assert_eq!(node.beta.delta, forest.deltas().at(node.depth));
        assert!(node.top_words.len() <= 20);
        assert!(node.top_words.windows(2).all(|w| w[0].count >= w[1].count));
        for c in &node.children {
            assert!(c.size <= node.size);
            assert_eq!(c.path.parent().as_ref(), Some(&node.path));
        }

        let mut scan: Vec<(u64, usize)> = (0..corpus.num_docs())
            .map(|d| (doc_count(&forest, d, &node.path), d))
            .filter(|x| x.0 > 0)
            .collect();
        scan.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let want: Vec<(String, u64)> = scan
            .iter()
            .take(5)
            .map(|&(c, d)| (corpus.documents[d].id.clone(), c))
            .collect();
        let got: Vec<(String, u64)> = node.top_documents.iter().map(|t| (t.id.clone(), t.count)).collect();
        assert_eq!(got, want, "top documents of {}", node.id);
    }
}

#[test]
fn histogram_bins_by_fixed_point_time() {
    assert_eq!(time_bin(0, 50), 0);
    assert_eq!(time_bin(1 << 32, 50), 49);
    assert_eq!(time_bin((1 << 32) / 2, 50), 25);
    assert_eq!(time_bin((1 << 32) / 50 - 1, 50), 0);
}

#[test]
fn export_round_trips() {
    let (corpus, forest) = trained();
    let export = export_model(&forest, &corpus, &ExportOptions::default());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("topics.json");
    export.save(&path).unwrap();
    assert_eq!(TopicTreeExport::load(&path).unwrap(), export);

    let mut bad: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    bad["schema_version"] = 99.into();
    std::fs::write(&path, bad.to_string()).unwrap();
    assert!(TopicTreeExport::load(&path).is_err());
}

#[test]
fn document_tree_matches_assignments() {
    let (corpus, forest) = trained();
    for d in [0, 7, 33] {
        let doc = &corpus.documents[d];
        let all = document_tree(&forest, &corpus, &doc.id, 0.0).unwrap();
        let mut seen = 0;
        for entry in &all.nodes {
            let c = doc_count(&forest, d, &entry.path);
            assert_eq!(entry.count, c);
            assert!((entry.share - c as f64 / doc.len() as f64).abs() < 1e-15);
            seen += 1;
        }
        let mut expected = 0;
        forest.walk(|p, _| {
            if doc_count(&forest, d, p) > 0 {
                expected += 1;
            }
        });
        assert_eq!(seen, expected);
        let some = document_tree(&forest, &corpus, &doc.id, 0.3).unwrap();
        assert!(some.nodes.iter().all(|n| n.share >= 0.3));
        for n in &some.nodes {
            for a in n.path.ancestors().filter(|a| !a.is_root()) {
                assert!(some.nodes.iter().any(|m| m.path == a));
            }
        }
    }
    assert!(document_tree(&forest, &corpus, "missing", 0.0).is_err());
}

#[test]
fn labels_apply_and_persist() {
    let (corpus, forest) = trained();
    let mut export = export_model(&forest, &corpus, &ExportOptions::default());
    let first = export.topics[0].id.clone();
    let mut labels = Labels::new();
    labels.insert(first.clone(), "Launches".into());
    labels.insert("9.9.9".into(), "Nothing".into());
    let rejected = apply_labels(&mut export, &labels);
    assert_eq!(rejected.len(), 1);
    assert_eq!(rejected[0].id, "9.9.9");
    assert_eq!(export.topics[0].label.as_deref(), Some("Launches"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("labels.json");
    assert!(load_labels(&path).unwrap().is_empty());
    save_labels(&path, &labels).unwrap();
    assert_eq!(load_labels(&path).unwrap(), labels);
}

#[test]
fn entity_only_topic_has_no_words() {
    let corpus = common::corpus(&[
        (0, &["@Nasa", "@Nasa", "@Esa"]),
        (5, &["rocket", "launch", "orbit"]),
    ]);
    let mut forest = Forest::new(&corpus, &common::small_params());
    let tokens = common::tokens(&corpus);
    let ents = forest.create_child(&NodePath::root(), false).unwrap();
    for t in tokens.iter().filter(|t| t.doc == 0) {
        forest.assign(*t, &ents).unwrap();
    }
    forest.sweep_ttl(&corpus);
    let words = forest.create_child(&NodePath::root(), false).unwrap();
    for t in tokens.iter().filter(|t| t.doc == 1) {
        forest.assign(*t, &words).unwrap();
    }
    forest.sweep_ttl(&corpus);
    let export = export_model(&forest, &corpus, &ExportOptions::default());
    let e = export.nodes().into_iter().find(|n| n.path == ents).unwrap().clone();
    assert!(e.top_words.is_empty());
    assert_eq!(e.top_entities[0].surface, "Nasa");
    assert_eq!(e.top_entities[0].count, 2);
    let w = export.nodes().into_iter().find(|n| n.path == words).unwrap().clone();
    assert!(w.top_entities.is_empty());
    assert_eq!(w.top_words.len(), 3);
}
