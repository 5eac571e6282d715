from iacsmells.cli import main

main()
