//! Graph text parser: no panics, and accepted graphs survive a
//! print/parse round trip unchanged.

#![no_main]

use gdl_core::graph::LabeledGraph;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = LabeledGraph::parse(text) {
        let again = LabeledGraph::parse(&g.to_text()).expect("printed graph parses");
        assert_eq!(again.edges(), g.edges());
        assert_eq!(again.n(), g.n());
    }
});
