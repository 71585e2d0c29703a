from gcelab.api.cli import main

main()
