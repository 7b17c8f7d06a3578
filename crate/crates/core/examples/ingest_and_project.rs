//! Loading a CSV or LIBSVM file (path as the first argument), or a synthetic
//! stand-in, and reducing its dimension with a random projection.

use hetero_sgd::harness::{generate_synthetic, ingest_csv, ingest_libsvm, random_projection, SyntheticSpec};

fn main() -> hetero_sgd::Result<()> {
    let data = match std::env::args().nth(1) {
        Some(path) if path.ends_with(".csv") => ingest_csv(&path)?,
        Some(path) => ingest_libsvm(&path)?,
        None => generate_synthetic(&SyntheticSpec { d: 784, n: 2000, flip_rate: 0.0 }, 1)?,
    };
    let positives = data.iter().filter(|e| e.y.sign() > 0.0).count();
    println!("{} examples, dimension {}, {positives} positive", data.len(), data.dim());
    let projected = random_projection(&data, 25.min(data.dim()), 5)?;
    println!("projected to {} dimensions, max ‖x‖ = {:.3}", projected.dim(), projected.max_norm());
    let (clean, noisy) = projected.split_at(data.len() / 10);
    println!("clean source {} examples, noisy source {}", clean.len(), noisy.len());
    Ok(())
}
