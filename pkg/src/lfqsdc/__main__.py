from lfqsdc.harness.cli import main

main()
