//! Regenerates `data/spearman_exact.txt`.
//!
//! `cargo run --release -p spearmix --example gen_tables > crates/core/data/spearman_exact.txt`

fn main() {
    let tables: Vec<_> = (2..=spearmix::tables::MAX_EXACT_N)
        .map(|n| {
            let start = std::time::Instant::now();
            let t = spearmix::tables::generate_exact_table(n).expect("table generation failed");
            eprintln!("n = {n:2}: {} points in {:.1?}", t.counts.len(), start.elapsed());
            t
        })
        .collect();
    print!("{}", spearmix::tables::write_tables(&tables));
}
