//! Every chapter of `book/` is included here as a module doc so that
//! `cargo test -p smartpde-guide` runs the book's code blocks.

#[cfg(doctest)]
macro_rules! chapters {
    ($($name:ident => $file:literal),* $(,)?) => {
        $(
            #[doc = include_str!(concat!("../../../book/src/", $file))]
            pub mod $name {}
        )*
    };
}

#[cfg(doctest)]
chapters! {
    introduction => "introduction.md",
    experiments => "experiments.md",
    solvers => "solvers.md",
    surrogate => "surrogate.md",
    attacks => "attacks.md",
    training => "training.md",
    baselines => "baselines.md",
    metrics => "metrics.md",
    formats => "formats.md",
}
