use simile_kit::knowledge::{properties_of, PropertyBackend, RemoteKnowledge};
use simile_kit::lm::remote::RemoteLm;
use simile_kit::lm::{generate, GenerationConfig, Scorer};
use simile_kit::remote::RemoteError;

/// A shell backend answering each request type with a canned line.
const FAKE: &str = r#"while IFS= read -r line; do
  case "$line" in
    *'"op":"perplexity"'*) echo '{"perplexity":2.5}' ;;
    *'"op":"generate"'*) echo '{"text":"It was like a ghost.","truncated":false}' ;;
    *'"op":"correct"'*) echo '{"text":"fixed."}' ;;
    *HasProperty*) echo '[{"text":"cold","score":0.4},{"text":"white","score":0.9}]' ;;
    *) echo '{"error":"unsupported"}' ;;
  esac
done"#;

#[test]
fn language_model_round_trip() {
    let lm = RemoteLm::spawn(FAKE).unwrap();
    assert_eq!(lm.perplexity("Love is rare.").unwrap(), 2.5);
    let g = generate("It was pale.", &GenerationConfig::default(), &lm.with_model("m")).unwrap();
    assert_eq!(g.text, "It was like a ghost.");
    assert!(!g.truncated);
}

#[test]
fn knowledge_round_trip_sorts_by_score() {
    let kb = RemoteKnowledge::spawn(FAKE).unwrap();
    let props = properties_of("Snow", 5, &kb).unwrap();
    let texts: Vec<_> = props.iter().map(|p| p.text.as_str()).collect();
    assert_eq!(texts, ["white", "cold"]);
    assert_eq!(kb.properties("snow", 1).unwrap().len(), 2);
}

#[test]
fn dead_backend_is_an_error() {
    let lm = RemoteLm::spawn("exit 0").unwrap();
    assert!(lm.perplexity("x").is_err());
    assert!(matches!(
        simile_kit::remote::JsonLineClient::spawn("exit 0")
            .unwrap()
            .call::<_, serde_json::Value>(&serde_json::json!({"op": "x"})),
        Err(RemoteError::Closed | RemoteError::Io(_))
    ));
}

#[test]
fn backend_errors_are_reported() {
    let c = simile_kit::remote::JsonLineClient::spawn(FAKE).unwrap();
    let r = c.call::<_, serde_json::Value>(&serde_json::json!({"op": "other"}));
    assert!(matches!(&r, Err(RemoteError::Backend(m)) if m == "unsupported"), "{r:?}");
}
