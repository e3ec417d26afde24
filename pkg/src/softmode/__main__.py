from softmode.cli import main

main()
