//! Splitting author lists and formatting names with templates.

use bstkit::names::{format_name, num_names, parse_name, split_names};

fn main() {
    let list = "Stein P. R. and  Ulam S. M.";
    println!("{list:?}: {} names -> {:?}", num_names(list), split_names(list));

    for name in [
        "H. Poincar\\'e",
        "Riss, F.",
        "de la Cruz, Jr., Maria",
        "Ludwig van Beethoven",
    ] {
        let p = parse_name(name).unwrap();
        println!(
            "{name}: first={:?} von={:?} last={:?} jr={:?}",
            p.first, p.von, p.last, p.jr
        );
        for template in ["{ll}", "{f.}{ll}", "{ff~}{vv~}{ll}{jj}", "{vv }{ll}, {f.}"] {
            match format_name(name, template) {
                Ok(s) => println!("    {template:<22} {s}"),
                Err(e) => println!("    {template:<22} error: {e}"),
            }
        }
    }
}
