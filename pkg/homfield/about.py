version = "0.1.0"

min_version = "0.1"

description = "homfield: homogeneous Hamiltonian formalism for field theory"

authors = ["homfield developers",]

url = ""
