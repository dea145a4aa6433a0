"""Mirror-gate aware transpilation for the iSWAP basis family.

Subpackages cover two-qubit gate geometry (weyl), reachable-coverage polytopes
(coverage), Haar scoring and numerical synthesis (score), the circuit DAG IR
(circuit), OpenQASM 2 I/O (qasm), coupling maps (topology), SABRE baseline
routing (sabre), mirror-aware routing (router), the dense simulation oracle
(simverify) and the command line front end (cli).
"""

__version__ = "0.1.0"
