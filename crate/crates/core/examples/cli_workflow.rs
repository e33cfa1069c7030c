// Writing a sample to CSV and testing it through the command-line front end.

use std::fs::File;
use std::io::BufWriter;

use rpflm::cli::{self, io};
use rpflm::rng::stream;
use rpflm::simlab::{gen_process, gen_response, scenario};

fn main() {
    let spec = scenario(1).unwrap();
    let mut rng = stream(21, &[]);
    let x = gen_process(spec.process, 60, &spec.grid, &mut rng).unwrap();
    let y = gen_response(&spec, &x, 2, &mut rng).unwrap();

    let dir = std::env::temp_dir().join(format!("rpflm-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let data = dir.join("x.csv");
    let response = dir.join("y.csv");
    io::write_sample(&mut BufWriter::new(File::create(&data).unwrap()), &x).unwrap();
    io::write_vector(&mut BufWriter::new(File::create(&response).unwrap()), &y).unwrap();

    let args = [
        "rpflm",
        "test",
        "--data",
        data.to_str().unwrap(),
        "--grid-header",
        "--response",
        response.to_str().unwrap(),
        "--bootstrap",
        "300",
        "--seed",
        "42",
    ];
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run_with(args, &mut out, &mut err);
    print!("{}", String::from_utf8_lossy(&out));
    eprint!("{}", String::from_utf8_lossy(&err));
    println!("exit status {code}");
    std::fs::remove_dir_all(&dir).unwrap();
}
