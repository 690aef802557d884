from database import DATABASE_URL, engine, init_db


def init():
    # Create all tables
    init_db(engine)
    print(f"Run registry ready at {DATABASE_URL}")


if __name__ == "__main__":
    init()
