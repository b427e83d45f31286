from qpq.cli import main

main()
