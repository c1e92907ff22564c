from phi4lambert.main import main

raise SystemExit(main())
