from sepdistill.cli import main

main()
