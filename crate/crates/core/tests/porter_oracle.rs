use titleqa::analysis::stem;

#[test]
fn matches_reference_stems() {
    let table = include_str!("data/porter_oracle.tsv");
    let mut mismatches = Vec::new();
    let mut total = 0;
    for line in table.lines().filter(|l| !l.is_empty()) {
        let (word, expected) = line.split_once('\t').expect("word<TAB>stem");
        total += 1;
        let got = stem(word);
        if got != expected {
            mismatches.push(format!("{word}: expected {expected}, got {got}"));
        }
    }
    assert!(total > 3000);
    assert!(
        mismatches.is_empty(),
        "{} of {total} differ:\n{}",
        mismatches.len(),
        mismatches.join("\n")
    );
}
