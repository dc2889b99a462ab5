use std::path::Path;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    if let Err(e) = memesim::calib::standin::write_all(&dir, 2017) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
    println!("wrote stand-in corpora to {}", dir.display());
}
