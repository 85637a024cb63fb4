//! One line per acceptance criterion; run with `--nocapture` to see them.

use spin7_cli::suite;

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    for id in suite::CRITERIA {
        let c = suite::criterion(id).unwrap_or_else(|e| panic!("criterion {id} aborted: {e}"));
        println!("{}", c.line());
        if !c.pass() {
            for r in c.rows.iter().filter(|r| !r.pass) {
                println!("    {}", r.line());
            }
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
