//! Templated toy data shared by the integration tests.
#![allow(dead_code)]

use std::path::Path;

pub const VEHICLES: &[(&str, &str)] = &[
    ("cheetah", "fast"),
    ("cave", "dark"),
    ("feather", "light"),
    ("rock", "hard"),
    ("oven", "hot"),
    ("glacier", "cold"),
    ("mouse", "quiet"),
    ("lion", "brave"),
    ("owl", "wise"),
    ("snail", "slow"),
];

pub const TRAIN_TOPICS: &[&str] = &[
    "The night",
    "Her voice",
    "His hands",
    "The road",
    "My brother",
    "The kitchen",
    "Our teacher",
    "The river",
    "That old car",
    "The soldier",
    "His answer",
    "The forest",
    "My grandmother",
    "The crowd",
    "Her dog",
    "The museum",
    "This coffee",
    "The engine",
    "Their house",
    "The stranger",
];

pub const HELD_OUT_TOPICS: &[&str] = &["The room", "The wind", "Your sister", "The city", "His father"];

const EVENTS: &[&str] = &["was", "seemed", "felt"];

/// 200 similes, one per (topic, vehicle).
pub fn similes() -> Vec<String> {
    let mut out = Vec::new();
    for (i, topic) in TRAIN_TOPICS.iter().enumerate() {
        for (j, (vehicle, _)) in VEHICLES.iter().enumerate() {
            out.push(format!("{topic} {} like a {vehicle}.", EVENTS[(i + j) % EVENTS.len()]));
        }
    }
    out
}

/// 50 literals over topics never seen in training.
pub fn held_out_literals() -> Vec<String> {
    let mut out = Vec::new();
    for (i, topic) in HELD_OUT_TOPICS.iter().enumerate() {
        for (j, (_, property)) in VEHICLES.iter().enumerate() {
            out.push(format!("{topic} {} {property}.", EVENTS[(i + j) % EVENTS.len()]));
        }
    }
    out
}

pub fn comments_jsonl() -> String {
    similes()
        .iter()
        .enumerate()
        .map(|(i, s)| serde_json::json!({"id": format!("c{i:03}"), "body": s, "created_utc": i}).to_string() + "\n")
        .collect()
}

/// Each vehicle's property at weight 2, plus a shared weaker distractor.
pub fn edges_tsv() -> String {
    let mut out = String::from("# concept\tproperty\tweight\n");
    for (v, p) in VEHICLES {
        out.push_str(&format!("{v}\t{p}\t2.0\n{v}\tstrange\t1.0\n"));
    }
    out
}

pub fn write(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}
