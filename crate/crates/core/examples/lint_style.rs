//! Static checks on a clean style and on a few broken ones.

use bstkit::lint::lint_style;

fn main() {
    let styles = [
        ("helloword.bst", include_str!("../data/helloword.bst").to_string()),
        (
            "late.bst",
            "EXECUTE {missing.fn}\nFUNCTION {missing.fn} { }\n".to_string(),
        ),
        ("leftover.bst", "FUNCTION {f} { #1 #2 + }\nEXECUTE {f}\n".to_string()),
        (
            "unused.bst",
            "ENTRY {author title}{}{}\nFUNCTION {f} { author write$ bogus }\n".to_string(),
        ),
    ];
    for (name, text) in &styles {
        let report = lint_style(text, name);
        println!("{name}: exit {}", report.exit_code());
        for f in &report.findings {
            println!("    {f}");
        }
    }
}
