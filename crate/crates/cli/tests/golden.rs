mod support;

#[test]
fn golden_files_match() {
    let failures: Vec<String> = support::golden_checks()
        .into_iter()
        .filter_map(|(name, r)| r.err().map(|e| format!("{name}: {e}")))
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
}
