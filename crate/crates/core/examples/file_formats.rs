//! Writing and reading the binary tensor and component files.

use overcomplete::harness::sample::sample_components;
use overcomplete::io;
use overcomplete::tensor::build_symmetric_tensor;

fn main() -> overcomplete::Result<()> {
    let dir = std::env::temp_dir().join("overcomplete-formats");
    std::fs::create_dir_all(&dir)?;

    let a = sample_components(6, 9, 3)?;
    let t = build_symmetric_tensor(&a)?;
    io::save_components(dir.join("a.cmpx"), &a)?;
    io::save_tensor(dir.join("t.t3dx"), &t)?;

    let a2 = io::load_components(dir.join("a.cmpx"))?;
    let t2 = io::load_tensor(dir.join("t.t3dx"))?;
    assert_eq!(a, a2);
    assert_eq!(t, t2);

    let bytes = std::fs::metadata(dir.join("t.t3dx"))?.len();
    println!("tensor d={} stored in {bytes} bytes, {} components round-tripped exactly", t2.dim(), a2.len());
    println!("files in {}", dir.display());
    Ok(())
}
