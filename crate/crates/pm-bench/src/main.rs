fn main() {
    println!("pm-bench placeholder");
}
