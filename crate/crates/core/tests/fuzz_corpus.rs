//! Replays the checked-in fuzz seeds through the parsers they target.

use std::fs;
use std::path::PathBuf;

use gdl_core::checkpoint::Checkpoint;
use gdl_core::config::Config;
use gdl_core::data::{read_set_dataset, read_vector_dataset};
use gdl_core::graph::LabeledGraph;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{dir:?}: {e}"))
        .map(|e| {
            let p = e.unwrap().path();
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn graph_seeds_round_trip() {
    for (p, text) in seeds("graph_parse") {
        let g = LabeledGraph::parse(&text).unwrap_or_else(|e| panic!("{p:?}: {e}"));
        assert_eq!(LabeledGraph::parse(&g.to_text()).unwrap(), g, "{p:?}");
    }
}

#[test]
fn checkpoint_seeds_round_trip() {
    for (p, text) in seeds("checkpoint_parse") {
        let c = Checkpoint::parse(&text).unwrap_or_else(|e| panic!("{p:?}: {e}"));
        assert_eq!(
            Checkpoint::parse(&c.to_json().unwrap()).unwrap(),
            c,
            "{p:?}"
        );
        c.restore().unwrap();
    }
}

#[test]
fn config_seeds_round_trip() {
    for (p, text) in seeds("config_parse") {
        let c = Config::parse(&text).unwrap_or_else(|e| panic!("{p:?}: {e}"));
        assert_eq!(Config::parse(&c.to_text()).unwrap(), c, "{p:?}");
    }
}

#[test]
fn dataset_seeds_parse() {
    for (p, text) in seeds("vector_dataset") {
        read_vector_dataset(text.as_bytes()).unwrap_or_else(|e| panic!("{p:?}: {e}"));
    }
    for (p, text) in seeds("set_dataset") {
        read_set_dataset(text.as_bytes()).unwrap_or_else(|e| panic!("{p:?}: {e}"));
    }
}
