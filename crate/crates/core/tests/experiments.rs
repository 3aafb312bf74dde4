use std::collections::BTreeSet;
use std::fs;

use gdl_core::config::Config;
use gdl_core::experiments::{self, EXPERIMENTS};

fn small(name: &str) -> Config {
    let text = match name {
        "extrapolation" => "extrapolation.trials = 5\n",
        "mod3" => "mod3.trials = 1\nmod3.depths = 1\nmod3.epochs = 50\n",
        "lipschitz-depth" => "lipschitz-depth.trials = 1\nlipschitz-depth.epochs = 50\n",
        "l2" => "l2.trials = 1\nl2.epochs = 50\n",
        "invariance" => {
            "invariance.deepset_cases = 20\ninvariance.gnn_cases = 10\ninvariance.datasets = 20\n"
        }
        other => panic!("no small config for {other}"),
    };
    Config::parse(text).unwrap()
}

#[test]
fn reports_land_in_the_output_directory() {
    for name in EXPERIMENTS {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join(name);
        let report = experiments::run(name, &small(name), 3).unwrap();
        let written = report.write_to(&out).unwrap();
        let on_disk: BTreeSet<_> = fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        assert_eq!(
            on_disk,
            written.iter().cloned().collect::<BTreeSet<_>>(),
            "{name}"
        );
        assert!(written.iter().all(|p| p.starts_with(&out)));
        assert!(on_disk.contains(&out.join("manifest.json")));
        assert!(on_disk.contains(&out.join("checks.csv")));
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["experiment"], name);
        assert_eq!(manifest["seed"], 3);
        for p in &written {
            if p.extension().is_some_and(|e| e == "csv") {
                assert!(
                    fs::read_to_string(p).unwrap().starts_with('#'),
                    "{p:?} lacks a schema line"
                );
            }
        }
    }
}

#[test]
fn reruns_write_identical_tables() {
    for name in EXPERIMENTS {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        let files: Vec<_> = dirs
            .iter()
            .map(|d| {
                experiments::run(name, &small(name), 11)
                    .unwrap()
                    .write_to(d.path())
                    .unwrap()
            })
            .collect();
        for (a, b) in files[0].iter().zip(&files[1]) {
            if a.extension().is_some_and(|e| e == "csv") {
                assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap(), "{a:?}");
            }
        }
    }
}

#[test]
fn unknown_names_and_keys_are_rejected() {
    assert!(experiments::run("nope", &Config::default(), 0).is_err());
    assert!(experiments::run("l2", &Config::parse("l2.typo = 1\n").unwrap(), 0).is_err());
}
