from hullcert.cli import main

main()
